import hypothesis

# engine sweeps and graph builds are slow enough that hypothesis deadlines
# would flake; example counts stay modest to keep the suite quick
hypothesis.settings.register_profile("suite", max_examples=25, deadline=None)
hypothesis.settings.load_profile("suite")
