import pytest

import snnts


def relay_network():
    net = snnts.Network()
    net.neurons = [
        snnts.Neuron(0, kind=snnts.NeuronKind.input),
        snnts.Neuron(1, kind=snnts.NeuronKind.output),
    ]
    net.synapses = [snnts.Synapse(0, 1, 1)]
    net.input_order = [0]
    net.output = 1
    return net


def test_run_window_hand_trace():
    state = snnts.SimulatorState()
    z, raster = snnts.run_window(relay_network(), state, [[0, 1]], 4)
    assert z == 2
    assert raster[1] == [1, 2]
    assert state.cycle == 4


def test_validate_reports_weight_range():
    net = relay_network()
    net.synapses = [snnts.Synapse(0, 1, 300)]
    assert any("weight out of range" in v for v in snnts.validate(net))
    with pytest.raises(ValueError):
        snnts.run_window(net, snnts.SimulatorState(), [[0]], 2)


def test_encoders():
    assert snnts.encode_rate(0.5, 10) == [0, 2, 4, 6, 8]
    assert snnts.encode_spikes(0.3, 10) == [0, 1, 2]
    spec = snnts.EncoderSpec(snnts.EncoderScheme.spikes, tau=4, bins=2, flip_flop=True,
                             ranges=[snnts.VariableRange(0.0, 1.0)])
    assert snnts.encode_observation([1.0], spec) == [[], [0, 1, 2, 3]]


def test_metrics():
    cm = snnts.ConfusionMatrix(tp=70, tn=184, fp=36, fn=4)
    assert abs(snnts.mcc(cm) - 0.707) < 0.005
    assert snnts.confusion([0, 0, 1, 0], [0, 0, 1, 1]) == snnts.ConfusionMatrix(1, 2, 0, 1)
    roc = snnts.roc_sweep([[5, 0]], [[1, 0]], 0.5)
    assert roc[0] == (0, 0.0, 1.0)
    assert roc[-1][2] == 0.0
    assert snnts.best_mcc_threshold([[0, 2, 3, 5]], [[0, 0, 1, 1]]) == (2, 1.0)


def test_datagen_train_and_roundtrip(tmp_path):
    data = snnts.build_dataset("easy", background=3, source=5, seed=1)
    assert len(data.runs) == 8
    snnts.save_dataset(tmp_path / "d", data)
    assert len(snnts.load_dataset(tmp_path / "d").runs) == 8

    spec = snnts.EncoderSpec(snnts.EncoderScheme.spikes, tau=8, bins=2, ranges=data.ranges)
    params = snnts.EonsParams()
    params.population_size = 6
    cfg = snnts.TrainConfig()
    cfg.epochs = 2
    cfg.batch_fraction = 1.0
    cfg.seed = 3
    result = snnts.train(data, spec, params, cfg)
    assert len(result.population) == 6
    assert len(result.history) == 2
    best = result.best.network
    assert best.validate() == []

    snnts.save_network(tmp_path / "best.net", best, spec)
    net, enc = snnts.load_network(tmp_path / "best.net")
    assert net == best
    assert enc.tau == 8
    trace = snnts.classify_run(net, enc, data.runs[0])
    assert len(trace.z) == data.runs[0].steps


def test_format_errors_are_value_errors():
    with pytest.raises(snnts.FormatError):
        snnts.parse_network("snnts-network 1\nsynapse 0 1 300\nend\n")
    with pytest.raises(ValueError):
        snnts.parse_network("garbage")


def test_ensemble_helpers():
    assert snnts.vote_combine([1, 1, 0], snnts.Vote.majority)
    assert len({tuple(m) for m, _ in snnts.enumerate_ensembles(3)}) == 4
