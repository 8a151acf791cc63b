import numpy as np

from cbq.cache import CACHE_ENV, DEFAULT_CACHE_DIR, TruthCache, cache_dir

KEY = dict(problem='sir', rate=10.0, seed=0)


def test_path_is_slug_and_hash(tmp_path):
    cache = TruthCache(tmp_path)
    path = cache.path('SIR Problem', KEY)
    assert path.parent == tmp_path
    assert path.name.startswith('sir-problem-')
    assert len(path.stem.rsplit('-', 1)[1]) == 12
    assert cache.path('SIR Problem', dict(KEY)) == path
    assert cache.path('SIR Problem', dict(KEY, seed=1)) != path


def test_miss(tmp_path, caplog):
    caplog.set_level('INFO', logger='cbq')
    assert TruthCache(tmp_path).load('sir', KEY) is None
    assert 'cache miss' in caplog.text


def test_store_and_load(tmp_path):
    cache = TruthCache(tmp_path / 'nested')
    table = np.array([[2.5, 1 / 3], [8.125, 123456.789]])
    path = cache.store('sir', KEY, table, header=('theta', 'truth'))
    lines = path.read_text().splitlines()
    assert lines[0] == '# {"problem": "sir", "rate": 10.0, "seed": 0}'
    assert lines[1] == 'theta,truth'
    assert np.array_equal(cache.load('sir', KEY), table)


def test_single_value(tmp_path):
    cache = TruthCache(tmp_path)
    cache.store('health', KEY, np.array([[0.25]]), header=('evppi',))
    assert cache.load('health', KEY).shape == (1, 1)


def test_location(monkeypatch, tmp_path):
    monkeypatch.delenv(CACHE_ENV, raising=False)
    assert str(cache_dir()) == DEFAULT_CACHE_DIR
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    assert cache_dir() == tmp_path
    assert cache_dir('elsewhere').name == 'elsewhere'
