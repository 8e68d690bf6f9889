"""Top-level acceptance suite. Each test covers one numbered criterion and
prints a single PASS/FAIL line on the live terminal (capture disabled)."""

import json
import time

import numpy as np
import pytest

from tsinvest.cli import main as cli_main
from tsinvest.data import (build_panels, fill_sentinel_and_pad,
                           filter_short_series, impute_total_funding,
                           impute_valuation, investor_centric_split,
                           load_panels, training_vocabulary)
from tsinvest.data.records import RawCompanyRecord
from tsinvest.data.schema import FEATURE_NAMES, PANEL_LENGTH, SENTINEL
from tsinvest.evaluation import auc_roc, roc_auc_trapezoid, roc_curve
from tsinvest.models import (MODEL_NAMES, GruConfig, TransformerConfig,
                             build_model, load_checkpoint, save_checkpoint)
from tsinvest.numerics import (Rng, Tensor, grad_check, max_error,
                               multi_head_attention, softmax)
from tsinvest.portfolio import SimConfig, simulate
from tsinvest.synthetic import SynthConfig, generate
from tsinvest.training import (TrainConfig, bce_loss, fit, panels_to_arrays,
                               predict_scores, relative_time_table)

from conftest import random_batch


@pytest.fixture
def announce(capsys):
    def _announce(criterion, ok, detail):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\n[criterion {criterion}] {status}: {detail}", flush=True)
    return _announce


GRAD_T = TransformerConfig(d_model=16, n_heads=2, n_blocks=2, ff_dim=24,
                           embed_dim=4, dropout_rate=0.0)
GRAD_G = GruConfig(hidden=6, embed_dim=4, dropout_rate=0.0)
VOCAB = 7


def _model(name, seed=0, t_cfg=GRAD_T, g_cfg=GRAD_G):
    return build_model(name, t_cfg if name in ("tmtsc", "te") else g_cfg,
                       VOCAB, seed)


def test_criterion_1_gradient_suite(announce):
    """Every parameter tensor of all four models: FD max relative error
    < 1e-6 at batch 4, T=24, K=16, D=16, 2 blocks; in under 2 minutes."""
    t0 = time.time()
    worst = {}
    rng = Rng(0)
    x, mask = random_batch(rng, b=4, t=24, k=16, n_cat=VOCAB)
    y = np.array([1, 0, 1, 0])
    for name in MODEL_NAMES:
        model = _model(name)

        def forward():
            return bce_loss(model.forward(x, mask, mode="eval"), y)

        reports = grad_check(forward, list(model.params.values()), n_coords=20)
        worst[name] = max_error(reports)
    elapsed = time.time() - t0
    ok = max(worst.values()) < 1e-6 and elapsed < 120
    announce(1, ok, f"max rel err {max(worst.values()):.2e} across "
                    f"{sum(len(_model(n).params) for n in MODEL_NAMES)} tensors, "
                    f"{elapsed:.0f}s")
    assert max(worst.values()) < 1e-6, worst
    assert elapsed < 120


def test_criterion_2_normalization_contract(announce):
    """10,000 random forward passes: rows sum to 1 within 1e-9, all finite."""
    tiny_t = TransformerConfig(d_model=8, n_heads=2, n_blocks=1, ff_dim=8,
                               embed_dim=2)
    tiny_g = GruConfig(hidden=3, embed_dim=2)
    models = [_model(name, t_cfg=tiny_t, g_cfg=tiny_g) for name in MODEL_NAMES]
    rng = Rng(1)
    n_passes = 10_000
    worst = 0.0
    for i in range(n_passes):
        model = models[i % len(models)]
        b = int(rng.integers(1, 5))
        x, mask = random_batch(rng, b=b, n_cat=VOCAB)
        out = model.forward(x, mask).data
        assert np.all(np.isfinite(out))
        worst = max(worst, float(np.abs(out.sum(axis=1) - 1.0).max()))
    ok = worst < 1e-9
    announce(2, ok, f"{n_passes} passes, worst row-sum deviation {worst:.2e}")
    assert ok


def test_criterion_3_auc_oracle(announce):
    rng = np.random.default_rng(2)
    worst_auc = worst_trap = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = np.round(rng.uniform(size=n), 1)  # heavy ties
        pos, neg = scores[labels == 1], scores[labels == 0]
        oracle = sum((p > q) + 0.5 * (p == q) for p in pos for q in neg) \
            / (len(pos) * len(neg))
        auc = auc_roc(scores, labels)
        worst_auc = max(worst_auc, abs(auc - oracle))
        worst_trap = max(worst_trap,
                         abs(roc_auc_trapezoid(roc_curve(scores, labels)) - auc))
    ok = worst_auc < 1e-12 and worst_trap < 1e-12
    announce(3, ok, f"pairwise-oracle gap {worst_auc:.2e}, "
                    f"trapezoid gap {worst_trap:.2e} over 200 instances")
    assert ok


def test_criterion_4_architecture_invariants(announce):
    rng = Rng(3)
    # (a) positional identity when P = 0
    model = _model("tmtsc")
    model.params["pos"].data[:] = 0.0
    x, mask = random_batch(rng, n_cat=VOCAB)
    trace = model.forward(x, mask, trace=True)
    a_ok = np.array_equal(trace.h_prime.data, trace.h.data)

    # (b) permutation equivariance with P = 0 (head permuted consistently)
    cfg = GRAD_T
    x2, _ = random_batch(rng, b=3, n_cat=VOCAB)
    full = np.ones((3, cfg.t_len))
    perm = Rng(4).permutation(cfg.t_len)
    base = model.forward(x2, full).data
    w = model.params["head.w"].data.reshape(cfg.n_classes, cfg.t_len, cfg.d_model)
    model.params["head.w"].data = w[:, perm, :].reshape(cfg.n_classes, -1).copy()
    permuted = model.forward(x2[:, perm, :], full[:, perm]).data
    b_ok = np.allclose(permuted, base, atol=1e-9)

    # (c) bit-invariance to padded-step content
    model2 = _model("tmtsc", seed=1)
    x3, mask3 = random_batch(rng, n_cat=VOCAB)
    x4 = x3.copy()
    pad = mask3 == 0.0
    x4[pad] = rng.normal(size=(int(pad.sum()), x3.shape[-1]))
    x4[..., 0] = np.where(pad, rng.integers(0, VOCAB, size=mask3.shape), x3[..., 0])
    c_ok = np.array_equal(model2.forward(x3, mask3).data,
                          model2.forward(x4, mask3).data)

    # (d) masked attention equals reduced-key attention
    d, heads, t, b = 8, 2, 6, 3
    params = {f"{k}_{s}": Tensor(rng.normal(size=(d, d)) * 0.2 if k == "w"
                                 else rng.normal(size=d) * 0.1)
              for k in ("w", "b") for s in ("q", "k", "v", "o")}
    h = rng.normal(size=(b, t, d))
    keep = 4
    km = np.zeros((b, t))
    km[:, t - keep:] = 1.0
    fullatt = multi_head_attention(Tensor(h), km, heads, params).data
    red = multi_head_attention(Tensor(h[:, t - keep:, :]),
                               np.ones((b, keep)), heads, params).data
    d_gap = float(np.abs(fullatt[:, t - keep:, :] - red).max())
    d_ok = d_gap < 1e-12

    ok = a_ok and b_ok and c_ok and d_ok
    announce(4, ok, f"P=0 identity {a_ok}, permutation {b_ok}, "
                    f"pad invariance {c_ok}, masked-attn gap {d_gap:.2e}")
    assert ok, (a_ok, b_ok, c_ok, d_ok)


def test_criterion_5_preprocessing_suite(announce):
    imp = impute_total_funding([None, 5e6, None, None])
    i_ok = imp == [0.0, 5e6, 5e6, 5e6]
    v_ok = impute_valuation([None, 7e6], [1e6, 2e6]) == [1e6, 7e6]

    grid = {name: [None] * 3 for name in FEATURE_NAMES}
    grid["n_news"] = [1.0, None, 2.0]
    x, mask = fill_sentinel_and_pad(grid)
    col = FEATURE_NAMES.index("n_news")
    pad_ok = (x.shape == (PANEL_LENGTH, 16) and mask[:-3].sum() == 0
              and x[-2, col] == SENTINEL and x[-1, col] == 2.0)

    def record(cid, gid, n_months):
        obs = []
        for i in range(n_months):
            obs.append((f"2021-{i + 1:02d}", {"n_news": float(i)}))
        return RawCompanyRecord(cid, gid, 0, 0, obs)

    kept = filter_short_series([record("drop", "g", 5), record("keep", "g", 6)])
    f_ok = [r.company_id for r in kept] == ["keep"]

    rng = np.random.default_rng(5)
    s_ok = True
    for trial in range(100):
        items = [record(f"c{g}-{i}", f"g{g}", 6)
                 for g in range(int(rng.integers(3, 15)))
                 for i in range(int(rng.integers(1, 5)))]
        split = investor_centric_split(items, (0.7, 0.15, 0.15), seed=trial)
        groups = [set(r.investor_group_id for r in split.part(p))
                  for p in split.parts]
        if groups[0] & groups[1] or groups[0] & groups[2] or groups[1] & groups[2]:
            s_ok = False
    ok = i_ok and v_ok and pad_ok and f_ok and s_ok
    announce(5, ok, f"imputation {i_ok and v_ok}, sentinel/pad {pad_ok}, "
                    f"filter {f_ok}, 100-split disjointness {s_ok}")
    assert ok


@pytest.mark.slow
def test_criterion_6_synthetic_learning_experiment(announce):
    """signal=1: TMTSC >= 0.93 and M-GRU >= 0.90 (5-seed mean test AUC,
    <= 30 epochs); signal=0: every model's 5-seed mean AUC in [0.45, 0.55].
    Under 15 minutes total."""
    t0 = time.time()

    def prepare(signal):
        recs = filter_short_series(generate(SynthConfig(
            n_companies=2000, seed=123, signal_strength=signal)))
        split = investor_centric_split(recs, (0.7, 0.15, 0.15), seed=0)
        vocab = training_vocabulary(split.train)
        parts = [build_panels(split.part(p), vocab, "vc") for p in split.parts]
        return parts, vocab

    def mean_auc(name, cfg, train_cfg, panels, vocab, n_seeds=5):
        tr, va, te = panels
        x, mask, y = panels_to_arrays(te)
        aucs = []
        for seed in range(n_seeds):
            model = build_model(name, cfg, vocab.size, seed)
            tc = TrainConfig(seed=seed, task="vc", **train_cfg)
            model, _ = fit(model, tr, va, tc)
            aucs.append(auc_roc(predict_scores(model, x, mask), y))
        return float(np.mean(aucs))

    panels, vocab = prepare(1.0)
    tmtsc_auc = mean_auc(
        "tmtsc", TransformerConfig(d_model=64, n_heads=4, n_blocks=2, ff_dim=128),
        dict(batch_size=128, max_epochs=30, learning_rate=1e-3), panels, vocab)
    mgru_auc = mean_auc(
        "mgru", GruConfig(hidden=32),
        dict(batch_size=128, max_epochs=30, learning_rate=3e-3), panels, vocab)

    panels0, vocab0 = prepare(0.0)
    null_cfgs = {
        "ugru": GruConfig(hidden=8),
        "mgru": GruConfig(hidden=16),
        "tmtsc": TransformerConfig(d_model=16, n_heads=2, n_blocks=2, ff_dim=32),
        "te": TransformerConfig(d_model=16, n_heads=2, n_blocks=2, ff_dim=32),
    }
    null_aucs = {name: mean_auc(name, cfg, dict(batch_size=256, max_epochs=3),
                                panels0, vocab0)
                 for name, cfg in null_cfgs.items()}
    elapsed = time.time() - t0

    signal_ok = tmtsc_auc >= 0.93 and mgru_auc >= 0.90
    null_ok = all(0.45 <= a <= 0.55 for a in null_aucs.values())
    time_ok = elapsed < 900
    ok = signal_ok and null_ok and time_ok
    announce(6, ok, f"TMTSC {tmtsc_auc:.3f} (>=0.93), M-GRU {mgru_auc:.3f} "
                    f"(>=0.90); null " +
                    ", ".join(f"{k} {v:.3f}" for k, v in null_aucs.items()) +
                    f"; {elapsed:.0f}s")
    assert signal_ok, (tmtsc_auc, mgru_auc)
    assert null_ok, null_aucs
    assert time_ok, elapsed


def test_criterion_7_loss_contract(announce):
    half = float(bce_loss(Tensor(np.full((2, 2), 0.5)), np.array([1, 0])).data)
    ln2_ok = abs(half - np.log(2)) < 1e-12

    rng = np.random.default_rng(6)
    ce_gap = 0.0
    for _ in range(30):
        n = int(rng.integers(2, 40))
        y_hat = softmax(Tensor(rng.normal(size=(n, 2))))
        y = rng.integers(0, 2, size=n)
        ce = -np.mean(np.log(y_hat.data[np.arange(n), y]))
        ce_gap = max(ce_gap, abs(float(bce_loss(y_hat, y).data) - ce))
    ce_ok = ce_gap < 1e-12

    p = rng.uniform(0.05, 0.95, size=9)
    y_hat = np.stack([1 - p, p], axis=1)
    y = rng.integers(0, 2, size=9)
    dup_ok = float(bce_loss(Tensor(y_hat), y).data) == \
        float(bce_loss(Tensor(np.tile(y_hat, (3, 1))), np.tile(y, 3)).data)

    ok = ln2_ok and ce_ok and dup_ok
    announce(7, ok, f"ln2 gap {abs(half - np.log(2)):.1e}, CE gap {ce_gap:.1e}, "
                    f"duplication exact {dup_ok}")
    assert ok


def test_criterion_8_portfolio_simulation(announce):
    t0 = time.time()
    labels = np.concatenate([np.ones(200), np.zeros(100)]).astype(int)
    sizes = [10, 25, 50, 100]
    config = SimConfig(portfolio_sizes=sizes, n_repeats=100, seed=0)

    oracle = simulate({"m": labels.astype(float)}, labels, config)
    oracle_ok = all(oracle.mean("m", s) == 1.0 and oracle.std("m", s) == 0.0
                    for s in sizes)

    p = 0.3
    scores = np.zeros(len(labels))
    scores[np.flatnonzero(labels == 1)[:60]] = 1.0
    fixed = simulate({"m": scores}, labels,
                     SimConfig(portfolio_sizes=sizes + [200], n_repeats=100, seed=1))
    frac_ok = all(abs(fixed.mean("m", s) - p) < 3 * np.sqrt(p * (1 - p) / s)
                  for s in sizes)
    full_ok = fixed.mean("m", 200) == p and fixed.std("m", 200) == 0.0

    rng = np.random.default_rng(7)
    s_a = rng.uniform(size=200)
    s_b = np.clip(s_a + rng.normal(scale=0.05, size=200), 0, 1)
    lab = np.ones(200, dtype=int)
    cfg = SimConfig(portfolio_sizes=[20], n_repeats=200, seed=2)
    paired = simulate({"a": s_a, "b": s_b}, lab, cfg)
    d_pair = np.asarray(paired.raw[("a", 20)]) - np.asarray(paired.raw[("b", 20)])
    ua = simulate({"a": s_a}, lab, SimConfig(portfolio_sizes=[20], n_repeats=200, seed=3))
    ub = simulate({"b": s_b}, lab, SimConfig(portfolio_sizes=[20], n_repeats=200, seed=4))
    d_unp = np.asarray(ua.raw[("a", 20)]) - np.asarray(ub.raw[("b", 20)])
    pair_ok = d_pair.var() <= d_unp.var()

    elapsed = time.time() - t0
    ok = oracle_ok and frac_ok and full_ok and pair_ok and elapsed < 60
    announce(8, ok, f"oracle {oracle_ok}, fixed-p {frac_ok}, full-pool {full_ok}, "
                    f"paired<=unpaired {pair_ok}, {elapsed:.1f}s")
    assert ok


def test_criterion_9_timing_harness(tmp_path, announce, small_dataset):
    panels, vocab = small_dataset
    x, mask, y = panels_to_arrays(panels["train"])
    x, mask, y = x[:32], mask[:32], y[:32]
    from tsinvest.training import benchmark_step_time
    tiny_t = TransformerConfig(d_model=16, n_heads=2, n_blocks=1, ff_dim=16)
    tiny_g = GruConfig(hidden=8)
    seconds = {}
    for name in MODEL_NAMES:
        cfg = tiny_t if name in ("tmtsc", "te") else tiny_g
        model = build_model(name, cfg, vocab.size, 0)
        seconds[name] = benchmark_step_time(model, x, mask, y, n_steps=3)
    rows = relative_time_table(seconds)
    out = tmp_path / "bench.csv"
    with open(out, "w") as fh:
        fh.write("model,sec_per_step,relative_time\n")
        for row in rows:
            fh.write(f"{row['model']},{row['sec_per_step']:.6f},"
                     f"{row['relative_time']:.1f}\n")
    lines = out.read_text().strip().splitlines()
    shape_ok = (lines[0] == "model,sec_per_step,relative_time"
                and [l.split(",")[0] for l in lines[1:]] ==
                ["ugru", "mgru", "te", "tmtsc"])
    norm_ok = min(float(l.split(",")[2]) for l in lines[1:]) == 1.0
    fastest = min(seconds, key=seconds.get)
    ok = shape_ok and norm_ok
    announce(9, ok, f"CSV shape {shape_ok}, fastest normalized {norm_ok}; "
                    f"fastest at this config: {fastest} (informational)")
    assert ok


@pytest.mark.slow
def test_criterion_10_determinism_and_persistence(tmp_path, announce):
    cfgfile = tmp_path / "synth.json"
    cfgfile.write_text(json.dumps({"n_companies": 120, "seed": 9}))
    traincfg = tmp_path / "train.json"
    traincfg.write_text(json.dumps(
        {"train": {"batch_size": 64, "max_epochs": 2, "task": "vc"},
         "model": {"hidden": 6, "embed_dim": 4}}))

    codes = []
    for rep in ("one", "two"):
        d = tmp_path / rep
        codes.append(cli_main(["synth", "--config", str(cfgfile),
                               "--out", str(d / "data.jsonl")]))
        codes.append(cli_main(["prepare", "--data", str(d / "data.jsonl"),
                               "--seed", "1", "--out", str(d / "panels")]))
        codes.append(cli_main(["train", "--panels", str(d / "panels"),
                               "--model", "mgru", "--config", str(traincfg),
                               "--out", str(d / "run")]))
        codes.append(cli_main(["eval", "--panels", str(d / "panels"),
                               "--checkpoint", str(d / "run" / "checkpoint"),
                               "--out", str(d / "evalout")]))
        codes.append(cli_main(["simulate", "--panels", str(d / "panels"),
                               "--checkpoints", str(d / "run" / "checkpoint"),
                               "--sizes", "2,3", "--repeats", "5",
                               "--out", str(d / "sim.csv")]))
    cli_ok = all(c == 0 for c in codes)

    read = lambda rep, rel: (tmp_path / rep / rel).read_bytes()
    data_ok = read("one", "data.jsonl") == read("two", "data.jsonl")
    ckpt_ok = (read("one", "run/checkpoint/params.bin") ==
               read("two", "run/checkpoint/params.bin"))
    losses = [json.loads(read(rep, "run/train_report.json"))["epoch_losses"]
              for rep in ("one", "two")]
    loss_ok = losses[0] == losses[1]

    model, vocab, task = load_checkpoint(tmp_path / "one" / "run" / "checkpoint")
    save_checkpoint(tmp_path / "resaved", model, vocab, task)
    rt_ok = (read("one", "run/checkpoint/params.bin") ==
             (tmp_path / "resaved" / "params.bin").read_bytes())

    ok = cli_ok and data_ok and ckpt_ok and loss_ok and rt_ok
    announce(10, ok, f"cli exit codes 0 {cli_ok}, dataset bytes {data_ok}, "
                     f"checkpoint bytes {ckpt_ok}, losses {loss_ok}, "
                     f"round-trip {rt_ok}")
    assert ok
