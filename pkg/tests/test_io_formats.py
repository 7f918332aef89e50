import numpy as np
import pytest
from hypothesis import given, strategies as st

from pccgraph.engine import Prediction
from pccgraph.evaluation import GridResult
from pccgraph.io_formats import (
    FeatureMatrix,
    FormatError,
    LabeledDataset,
    load_feature_table,
    read_heatmap,
    read_predictions,
    write_feature_table,
    write_heatmap,
    write_predictions,
)


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestFeatureMatrix:
    def test_rejects_duplicate_ids(self):
        with pytest.raises(ValueError, match="duplicate"):
            FeatureMatrix(["a", "a"], np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            FeatureMatrix(["a", "b"], np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_rejects_id_count_mismatch(self):
        with pytest.raises(ValueError):
            FeatureMatrix(["a"], np.zeros((2, 2)))


class TestLoadFeatureTable:
    def test_sorted_class_dictionary(self, tmp_path):
        path = write_csv(
            tmp_path / "f.csv",
            "id,label,f0\nw,a,1\nx,a,2\ny,b,3\nz,b,4\n",
        )
        ds = load_feature_table(path)
        assert ds.classes == ["a", "b"]
        assert ds.labels.tolist() == [0, 0, 1, 1]
        assert ds.n == 4 and ds.features.d == 1

    def test_single_unlabeled_row(self, tmp_path):
        path = write_csv(tmp_path / "f.csv", "id,label,f0,f1,f2\nonly,,1,2,3\n")
        ds = load_feature_table(path)
        assert ds.n == 1
        assert ds.features.d == 3
        assert ds.num_classes == 0
        assert ds.labels.tolist() == [-1]

    def test_wide_feature_table(self, tmp_path):
        # 342 rows x 25,088 features: the no-pooling convnet output shape
        n, d = 342, 25088
        rng = np.random.default_rng(0)
        blocks = rng.integers(0, 100, size=(n, d))
        lines = ["id,label," + ",".join(f"f{i}" for i in range(d))]
        for i in range(n):
            label = "clear" if i < 175 else "nonclear"
            lines.append(f"img{i:04d},{label}," + ",".join(map(str, blocks[i])))
        path = write_csv(tmp_path / "big.csv", "\n".join(lines) + "\n")
        ds = load_feature_table(path)
        assert ds.n == 342
        assert ds.features.d == 25088
        assert ds.num_classes == 2

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("id,label,f0\n", "no data rows"),
            ("identifier,label,f0\na,,1\n", "line 1"),
            ("id,label,f1\na,,1\n", "line 1"),
            ("id,label,f0\na,,1\nb,,1,2\n", "line 3"),
            ("id,label,f0\na,,1\nb,,zzz\n", "line 3"),
            ("id,label,f0\na,,1\na,,2\n", "line 3"),
            ("id,label,f0\na,,1\nb,,inf\n", "line 3"),
        ],
    )
    def test_malformed_inputs_name_the_line(self, tmp_path, text, fragment):
        path = write_csv(tmp_path / "bad.csv", text)
        with pytest.raises(FormatError, match=fragment):
            load_feature_table(path)

    def test_ragged_error_names_first_offending_line(self, tmp_path):
        path = write_csv(
            tmp_path / "bad.csv", "id,label,f0,f1\na,,1,2\nb,,3\nc,,4\n"
        )
        with pytest.raises(FormatError, match="line 3"):
            load_feature_table(path)

    def test_scientific_notation_accepted(self, tmp_path):
        path = write_csv(tmp_path / "f.csv", "id,label,f0\na,x,1.5e-3\nb,y,-2E+2\n")
        ds = load_feature_table(path)
        assert ds.features.values[0, 0] == pytest.approx(1.5e-3)
        assert ds.features.values[1, 0] == -200.0


class TestFeatureRoundTrip:
    def test_write_then_load(self, tmp_path):
        rng = np.random.default_rng(3)
        ds = LabeledDataset(
            FeatureMatrix([f"i{j}" for j in range(5)], rng.normal(size=(5, 4))),
            np.array([0, 1, -1, 1, 0]),
            ["neg", "pos"],
        )
        path = tmp_path / "rt.csv"
        write_feature_table(ds, path)
        back = load_feature_table(path)
        assert back.features.ids == ds.features.ids
        assert back.classes == ds.classes
        assert back.labels.tolist() == ds.labels.tolist()
        assert np.allclose(back.features.values, ds.features.values, atol=1e-9)


def tiny_dataset(n=2, c=2):
    return LabeledDataset(
        FeatureMatrix([f"i{j}" for j in range(n)], np.zeros((n, 2))),
        np.full(n, -1),
        [f"c{j}" for j in range(c)],
    )


class TestPredictions:
    def test_direct_serialization(self, tmp_path):
        ds = tiny_dataset()
        pred = Prediction(np.array([0, 1]), np.array([[1.0, 0.0], [0.0, 1.0]]), 5, True)
        path = tmp_path / "p.csv"
        write_predictions(ds, pred, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "id,predicted_label,dom_0,dom_1"
        assert lines[1] == "i0,c0,1,0"
        assert lines[2] == "i1,c1,0,1"

    def test_round_trip_identical_indices(self, tmp_path):
        rng = np.random.default_rng(9)
        n, c = 20, 3
        ds = tiny_dataset(n, c)
        dom = rng.dirichlet(np.ones(c), size=n)
        pred = Prediction(np.argmax(dom, axis=1), dom, 10, False)
        path = tmp_path / "p.csv"
        write_predictions(ds, pred, path)
        ids, names, dom_back = read_predictions(path)
        assert ids == ds.features.ids
        assert [ds.classes.index(nm) for nm in names] == pred.labels.tolist()
        assert np.abs(dom_back - dom).max() <= 1e-9

    def test_length_mismatch_rejected(self, tmp_path):
        ds = tiny_dataset(3)
        pred = Prediction(np.array([0, 1]), np.array([[1.0, 0.0], [0.0, 1.0]]), 1, True)
        with pytest.raises(ValueError, match="covers 2"):
            write_predictions(ds, pred, tmp_path / "p.csv")

    def test_unnormalized_rows_rejected(self, tmp_path):
        ds = tiny_dataset()
        pred = Prediction(np.array([0, 0]), np.array([[0.9, 0.0], [1.0, 0.0]]), 1, True)
        with pytest.raises(ValueError, match="sums to"):
            write_predictions(ds, pred, tmp_path / "p.csv")

    @given(
        seed=st.integers(0, 2**31),
        n=st.integers(1, 12),
        c=st.integers(2, 5),
    )
    def test_round_trip_within_1e9(self, tmp_path_factory, seed, n, c):
        rng = np.random.default_rng(seed)
        dom = rng.dirichlet(np.ones(c), size=n)
        ds = tiny_dataset(n, c)
        pred = Prediction(np.argmax(dom, axis=1), dom, 1, True)
        path = tmp_path_factory.mktemp("rt") / "p.csv"
        write_predictions(ds, pred, path)
        _, _, dom_back = read_predictions(path)
        assert np.abs(dom_back - dom).max() <= 1e-9


def make_grid(p_values, k_values, means):
    means = np.asarray(means, dtype=np.float64)
    return GridResult(
        p_values=list(p_values),
        k_values=list(k_values),
        means=means,
        stds=np.zeros_like(means),
        repetitions=1,
        best_p=p_values[0],
        best_k=k_values[0],
    )


class TestHeatmap:
    def test_full_grid_shape(self, tmp_path):
        rng = np.random.default_rng(1)
        grid = make_grid(range(1, 21), range(1, 21), rng.random((20, 20)))
        path = tmp_path / "h.csv"
        write_heatmap(grid, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 21
        assert all(len(line.split(",")) == 21 for line in lines)
        assert lines[0].startswith("p\\k,1,2,")

    def test_singleton_cell(self, tmp_path):
        path = tmp_path / "h.csv"
        write_heatmap(make_grid([1], [1], [[1.0]]), path)
        _, _, means = read_heatmap(path)
        assert means.shape == (1, 1)
        assert means[0, 0] == 1.0

    def test_cell_lands_at_its_row_and_column(self, tmp_path):
        means = np.zeros((20, 20))
        means[9, 6] = 0.7701  # p=10, k=7 under 1-based ranges
        path = tmp_path / "h.csv"
        write_heatmap(make_grid(range(1, 21), range(1, 21), means), path)
        p_values, k_values, back = read_heatmap(path)
        assert back[p_values.index(10), k_values.index(7)] == pytest.approx(0.7701, abs=1e-9)

    def test_ragged_grid_rejected(self, tmp_path):
        grid = make_grid([1, 2], [1, 2], np.zeros((2, 2)))
        grid.means = [[0.1, 0.2], [0.3]]
        with pytest.raises(ValueError, match="rectangular"):
            write_heatmap(grid, tmp_path / "h.csv")

    @given(
        seed=st.integers(0, 2**31),
        rows=st.integers(1, 6),
        cols=st.integers(1, 6),
    )
    def test_round_trip_within_1e9(self, tmp_path_factory, seed, rows, cols):
        rng = np.random.default_rng(seed)
        means = rng.random((rows, cols))
        grid = make_grid(range(1, rows + 1), range(1, cols + 1), means)
        path = tmp_path_factory.mktemp("hm") / "h.csv"
        write_heatmap(grid, path)
        p_values, k_values, back = read_heatmap(path)
        assert p_values == grid.p_values
        assert k_values == grid.k_values
        assert np.abs(back - means).max() <= 1e-9
