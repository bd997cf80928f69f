import numpy as np

from lifeladder import variables as V
from lifeladder.bayesnet import fit_cpts
from lifeladder.figures import plot_network, plot_predicted_vs_actual, plot_sweep
from lifeladder.inference import query_sweep
from lifeladder.structure import bootstrap_learn, consensus


def _png_ok(path):
    data = path.read_bytes()
    return data.startswith(b"\x89PNG") and len(data) > 2000


def test_predicted_vs_actual_renders(tmp_path):
    rng = np.random.default_rng(0)
    actual = rng.uniform(3, 8, size=60)
    predicted = actual + rng.normal(0, 0.3, size=60)
    path = tmp_path / "scatter.png"
    plot_predicted_vs_actual(actual, predicted, path, config_hash="beef")
    assert _png_ok(path)


def test_sweep_and_network_render(tmp_path, discrete_table):
    ast = bootstrap_learn(discrete_table, replicates=10, seed=2)
    dag = consensus(ast, threshold=0.5)
    net = fit_cpts(dag, discrete_table, alpha=1.0)
    sweep = query_sweep(net, V.HEALTHY_LIFE_EXPECTANCY, V.LOG_GDP)

    bars = tmp_path / "sweep.png"
    plot_sweep(sweep, V.HEALTHY_LIFE_EXPECTANCY, V.LOG_GDP, bars, config_hash="beef")
    assert _png_ok(bars)

    graph = tmp_path / "network.png"
    plot_network(dag, graph, ast=ast, config_hash="beef")
    assert _png_ok(graph)
