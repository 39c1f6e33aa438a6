"""Command-line front end: stimulus generation, characterization, single
runs, density sweeps over all six architectures, and oracle verification.

Exit codes: 0 success, 1 runtime/data error, 2 usage error. All randomness
flows from explicit seeds; identical invocations produce byte-identical
output.
"""

import argparse
import os
import sys
import tempfile

import numpy as np

from . import cost, neuron, stimulus
from .fxp import LUT_EXACT, LUT_POW2, BetaSpec, QFormat, build_decay_lut

CSV_COLUMNS = (
    "config,mode,decay,io,temporal_density,input_density,trial,seed,"
    "latency_cycles,energy_units,power_units_per_cycle,"
    "ratio_vs_clock_mult,ratio_vs_clock_shift"
)

# (mode, decay, io) for the six buildable architectures, sweep order
ALL_CONFIGS = (
    ("clock", "mult", "serial"),
    ("clock", "shift", "serial"),
    ("event", "mult", "serial"),
    ("event", "shift", "serial"),
    ("event", "mult", "aer"),
    ("event", "shift", "aer"),
)

# default per-channel weight raws, cycled to the channel count; modest
# magnitudes keep per-step input sums below the default threshold so the
# clock- and event-driven dynamics stay equivalent
DEFAULT_WEIGHT_PATTERN = (12, -7, 9, 15, -3, 6, 11, -14)
DEFAULT_THRESHOLD = 100

DEFAULT_SWEEP_TEMPORAL = tuple(round(0.05 * k, 2) for k in range(1, 21))
DEFAULT_SWEEP_INPUT = (0.25, 0.5, 0.75, 1.0)


def default_weights(n_channels):
    pat = DEFAULT_WEIGHT_PATTERN
    return tuple(pat[i % len(pat)] for i in range(n_channels))


def derive_seed(base, *indices):
    """Stable 64-bit seed for one sweep point."""
    ss = np.random.SeedSequence([int(base)] + [int(i) for i in indices])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def fnum(x):
    """Deterministic, locale-free number formatting for CSV cells."""
    if isinstance(x, int):
        return str(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    # repr round-trips exactly, so identities like E = P * L survive the
    # text round trip at float precision
    return repr(x)


def make_config(mode, decay, io, reset="zero", beta=None, beta_shift=None,
                threshold=DEFAULT_THRESHOLD, weights=None, n_channels=8,
                bias=None):
    if beta is not None and beta_shift is not None:
        raise ValueError("give either a real decay factor or a shift amount")
    if beta_shift is not None:
        spec = BetaSpec.one_minus_pow2(beta_shift)
    elif beta is not None:
        spec = BetaSpec.exact(beta)
    else:
        spec = BetaSpec.one_minus_pow2(1)
    if weights is None:
        weights = default_weights(n_channels)
    return neuron.NeuronConfig(
        n_inputs=n_channels,
        weights=weights,
        threshold=threshold,
        beta=spec,
        mode=mode,
        decay_impl=decay,
        io_mode=io,
        reset_mode=reset,
        bias=bias,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    if args.preset is not None:
        temporal, inp = stimulus.PRESETS[args.preset]
    else:
        if args.temporal is None or args.input is None:
            raise ValueError("need --preset or both --temporal and --input")
        temporal, inp = args.temporal, args.input
    profile = stimulus.DensityProfile(temporal, inp)
    train = stimulus.generate(profile, args.channels, args.steps, args.seed)
    meta = [
        f"generator={stimulus.RNG_ALGORITHM} seed={args.seed}",
        f"target temporal_density={fnum(temporal)} input_density={fnum(inp)}",
    ]
    stimulus.save(train, args.out, metadata=meta)
    measured = stimulus.measure_density(train)
    print(f"temporal_density={fnum(measured.temporal_density)} "
          f"input_density={fnum(measured.input_density)}")
    return 0


def cmd_characterize(args):
    measured = stimulus.measure_density(stimulus.load(args.train))
    print(f"temporal_density={fnum(measured.temporal_density)} "
          f"input_density={fnum(measured.input_density)}")
    return 0


def _load_model(args):
    if getattr(args, "model_config", None):
        return cost.load_model_config(args.model_config)
    return cost.DEFAULT_CYCLE_COSTS, cost.DEFAULT_ENERGY_WEIGHTS


def cmd_run(args, out=None):
    out = out or sys.stdout
    train = stimulus.load(args.train)
    weights = None
    if args.weights:
        weights = tuple(int(w) for w in args.weights.split(","))
    config = make_config(args.mode, args.decay, args.io, args.reset,
                         args.beta, args.beta_shift, args.threshold,
                         weights, train.n_channels, args.bias)
    costs, eweights = _load_model(args)
    trace = neuron.run(config, train, costs)
    metrics = cost.metrics_from_trace(trace, config, eweights)
    measured = stimulus.measure_density(train)
    out.write(CSV_COLUMNS + "\n")
    out.write(",".join([
        config.name, config.mode, config.decay_impl, config.io_mode,
        fnum(measured.temporal_density), fnum(measured.input_density),
        "-", "-",
        fnum(metrics.latency_cycles), fnum(metrics.energy_units),
        fnum(metrics.avg_power_units), "-", "-",
    ]) + "\n")
    if args.trace:
        out.write("trace_time,u_raw,fired\n")
        out.write(f"init,{config.u_init},0\n")
        for rec in trace.records:
            out.write(f"{rec.time},{rec.u},{int(rec.fired)}\n")
    return 0


def sweep_rows(temporal_list, input_list, n_channels, n_steps, trials,
               base_seed, configs=ALL_CONFIGS, costs=None, eweights=None,
               threshold=DEFAULT_THRESHOLD, weights=None):
    """All per-trial and aggregate CSV rows for a sweep, config-major order."""
    costs = costs or cost.DEFAULT_CYCLE_COSTS
    eweights = eweights or cost.DEFAULT_ENERGY_WEIGHTS
    weights = weights or default_weights(n_channels)

    neuron_configs = {
        key: make_config(*key, threshold=threshold, weights=weights,
                         n_channels=n_channels)
        for key in configs
    }
    for baseline in (("clock", "mult", "serial"), ("clock", "shift", "serial")):
        if baseline not in neuron_configs:
            neuron_configs[baseline] = make_config(
                *baseline, threshold=threshold, weights=weights,
                n_channels=n_channels)

    # results[key][(ti, ii, trial)] = (latency, energy, power, r_mult, r_shift)
    results = {key: {} for key in configs}
    for ti, temporal in enumerate(temporal_list):
        for ii, inp in enumerate(input_list):
            for trial in range(trials):
                seed = derive_seed(base_seed, ti, ii, trial)
                train = stimulus.generate(
                    stimulus.DensityProfile(temporal, inp),
                    n_channels, n_steps, seed)
                clk_mult = cost.latency(
                    neuron_configs[("clock", "mult", "serial")], train, costs)
                clk_shift = cost.latency(
                    neuron_configs[("clock", "shift", "serial")], train, costs)
                for key in configs:
                    cfg = neuron_configs[key]
                    trace = neuron.run(cfg, train, costs)
                    m = cost.metrics_from_trace(trace, cfg, eweights)
                    results[key][(ti, ii, trial)] = (
                        m.latency_cycles, m.energy_units, m.avg_power_units,
                        m.latency_cycles / clk_mult,
                        m.latency_cycles / clk_shift,
                        seed,
                    )

    rows = []
    for key in configs:
        cfg = neuron_configs[key]
        prefix = [cfg.name, cfg.mode, cfg.decay_impl, cfg.io_mode]
        for ti, temporal in enumerate(temporal_list):
            for ii, inp in enumerate(input_list):
                for trial in range(trials):
                    lat, en, pw, rm, rs, seed = results[key][(ti, ii, trial)]
                    rows.append(prefix + [
                        fnum(temporal), fnum(inp), str(trial), str(seed),
                        fnum(lat), fnum(en), fnum(pw), fnum(rm), fnum(rs),
                    ])
    # aggregate rows: mean and sample std over trials, per grid point
    for key in configs:
        cfg = neuron_configs[key]
        prefix = [cfg.name, cfg.mode, cfg.decay_impl, cfg.io_mode]
        for ti, temporal in enumerate(temporal_list):
            for ii, inp in enumerate(input_list):
                cols = list(zip(*[
                    results[key][(ti, ii, trial)][:5] for trial in range(trials)
                ]))
                means = [float(np.mean(c)) for c in cols]
                stds = [
                    float(np.std(c, ddof=1)) if trials > 1 else 0.0
                    for c in cols
                ]
                for label, vals in (("mean", means), ("std", stds)):
                    rows.append(prefix + [
                        fnum(temporal), fnum(inp), label, "-",
                    ] + [fnum(v) for v in vals])
    return rows


def cmd_sweep(args, out=None):
    out = out or sys.stdout
    temporal_list = (
        tuple(float(x) for x in args.temporal.split(","))
        if args.temporal else DEFAULT_SWEEP_TEMPORAL
    )
    input_list = (
        tuple(float(x) for x in args.input.split(","))
        if args.input else DEFAULT_SWEEP_INPUT
    )
    weights = None
    if args.weights:
        weights = tuple(int(w) for w in args.weights.split(","))
    costs, eweights = _load_model(args)
    rows = sweep_rows(temporal_list, input_list, args.channels, args.steps,
                      args.trials, args.seed, ALL_CONFIGS, costs, eweights,
                      args.threshold, weights)
    text = CSV_COLUMNS + "\n" + "".join(",".join(r) + "\n" for r in rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def cmd_lut(args, out=None):
    out = out or sys.stdout
    if args.beta_shift is not None:
        spec = BetaSpec.one_minus_pow2(args.beta_shift)
    else:
        spec = BetaSpec.exact(args.beta if args.beta is not None else 0.5)
    mode = LUT_EXACT if args.lut_mode == "exact" else LUT_POW2
    lut = build_decay_lut(spec, args.max_dt, mode,
                          QFormat(9, args.beta_frac), max_shift=8)
    out.write("dt,raw_or_shift\n")
    for dt, entry in enumerate(lut.entries):
        value = entry.raw if mode == LUT_EXACT else entry
        out.write(f"{dt},{value}\n")
    return 0


# ---------------------------------------------------------------------------
# verification (the oracle-equivalence suites)


def rel_close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _random_profile(rng):
    return stimulus.DensityProfile(
        float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.13, 1.0)))


def _verify_weights(rng, n_channels):
    # magnitudes kept small so per-step input sums stay below threshold;
    # subtract-reset would otherwise legitimately desynchronize the
    # clock- and event-driven models (see README)
    return tuple(int(w) for w in rng.integers(-12, 13, size=n_channels))


def check_real_equivalence(trials, seed, n_channels=8, n_steps=100):
    """Real-arithmetic clock vs event membrane agreement at event instants.

    Returns (ok, counterexample, max relative error).
    """
    rng = np.random.default_rng(seed)
    betas = [BetaSpec.one_minus_pow2(1), BetaSpec.one_minus_pow2(4),
             BetaSpec.exact(0.9325)]
    max_err = 0.0
    for trial in range(trials):
        train = stimulus.generate(_random_profile(rng), n_channels, n_steps,
                                  derive_seed(seed, 1, trial))
        weights = _verify_weights(rng, n_channels)
        beta = betas[trial % len(betas)]
        reset = "zero" if trial % 2 == 0 else "subtract"
        base = dict(n_inputs=n_channels, weights=weights, threshold=100,
                    beta=beta, reset_mode=reset)
        ct = neuron.reference_run(
            neuron.NeuronConfig(mode="clock", decay_impl="mult",
                                io_mode="serial", **base), train)
        et = neuron.reference_run(
            neuron.NeuronConfig(mode="event", decay_impl="mult",
                                io_mode="serial", **base), train)
        clock_by_time = {r.time: r for r in ct.records}
        for rec in et.records:
            cr = clock_by_time[rec.time]
            err = abs(rec.u - cr.u) / max(1.0, abs(rec.u), abs(cr.u))
            max_err = max(max_err, err)
            if err > 1e-9 or rec.fired != cr.fired:
                return False, (trial, rec.time), max_err
    return True, None, max_err


def check_quantized_divergence(trials, seed, n_channels=8, n_steps=100):
    """Quantized event vs clock divergence stays within the recorded bounds.

    Returns (ok, counterexample, max observed divergence in raw LSBs).
    """
    rng = np.random.default_rng(seed)
    specs = [(BetaSpec.one_minus_pow2(1), "mult"),
             (BetaSpec.one_minus_pow2(1), "shift"),
             (BetaSpec.one_minus_pow2(4), "mult"),
             (BetaSpec.one_minus_pow2(4), "shift")]
    max_div = 0
    for trial in range(trials):
        train = stimulus.generate(_random_profile(rng), n_channels, n_steps,
                                  derive_seed(seed, 2, trial))
        weights = _verify_weights(rng, n_channels)
        beta, impl = specs[trial % len(specs)]
        reset = "zero" if trial % 2 == 0 else "subtract"
        bound = neuron.QUANT_DIVERGENCE_BOUND[(round(beta.value, 4), impl)]
        base = dict(n_inputs=n_channels, weights=weights, threshold=100,
                    beta=beta, decay_impl=impl, reset_mode=reset)
        ct = neuron.run(neuron.NeuronConfig(mode="clock", io_mode="serial",
                                            **base), train)
        et = neuron.run(neuron.NeuronConfig(mode="event", io_mode="serial",
                                            **base), train)
        clock_by_time = {r.time: r for r in ct.records}
        for rec in et.records:
            div = abs(rec.u - clock_by_time[rec.time].u)
            max_div = max(max_div, div)
            if div > bound:
                return False, (trial, rec.time), max_div
    return True, None, max_div


def check_io_stability(trials, seed, n_channels=8, n_steps=100):
    """Event-serial and event-AER traces are bit-identical (fires and u)."""
    rng = np.random.default_rng(seed)
    for trial in range(trials):
        train = stimulus.generate(_random_profile(rng), n_channels, n_steps,
                                  derive_seed(seed, 3, trial))
        weights = _verify_weights(rng, n_channels)
        impl = "mult" if trial % 2 == 0 else "shift"
        base = dict(n_inputs=n_channels, weights=weights, threshold=100,
                    beta=BetaSpec.one_minus_pow2(4), decay_impl=impl,
                    mode="event")
        st = neuron.run(neuron.NeuronConfig(io_mode="serial", **base), train)
        at = neuron.run(neuron.NeuronConfig(io_mode="aer", **base), train)
        if [(r.time, r.u, r.fired) for r in st.records] != \
                [(r.time, r.u, r.fired) for r in at.records]:
            return False, (trial, None)
    return True, None


def check_round_trips(trials, seed, n_channels=8, n_steps=100):
    """Serial, AER and file encodings are exact identities."""
    rng = np.random.default_rng(seed)
    tmp = tempfile.NamedTemporaryFile(mode="w", suffix=".spk", delete=False)
    tmp.close()
    try:
        for trial in range(trials):
            train = stimulus.generate(_random_profile(rng), n_channels,
                                      n_steps, derive_seed(seed, 4, trial))
            if stimulus.decode_serial(stimulus.encode_serial(train),
                                      n_channels) != train:
                return False, (trial, "serial")
            if stimulus.decode_aer(stimulus.encode_aer(train), n_channels,
                                   n_steps) != train:
                return False, (trial, "aer")
            stimulus.save(train, tmp.name)
            if stimulus.load(tmp.name) != train:
                return False, (trial, "file")
    finally:
        os.unlink(tmp.name)
    return True, None


def check_fire_boundary():
    """An exact-threshold hit must fire in every engine and the reference."""
    train = stimulus.SpikeTrain(1, 10, [(0, 0)])
    for mode, decay, io in ALL_CONFIGS:
        config = neuron.NeuronConfig(
            n_inputs=1, weights=(25,), threshold=25,
            beta=BetaSpec.one_minus_pow2(1), mode=mode, decay_impl=decay,
            io_mode=io)
        if neuron.run(config, train).fire_times() != [0]:
            return False, (mode, decay, io)
        if neuron.reference_run(config, train).fire_times() != [0]:
            return False, (mode, decay, io, "reference")
    return True, None


def cmd_verify(args, out=None):
    out = out or sys.stdout
    trials = args.trials
    seed = args.seed
    failures = []

    ok, cex, max_err = check_real_equivalence(trials, seed)
    out.write(f"real-arithmetic equivalence: {'PASS' if ok else 'FAIL'} "
              f"(max relative error {max_err:.3e})\n")
    if not ok:
        failures.append(("real-arithmetic equivalence", cex))

    ok, cex, max_div = check_quantized_divergence(trials, seed)
    out.write(f"quantized divergence bound:  {'PASS' if ok else 'FAIL'} "
              f"(max observed divergence {max_div} raw LSBs)\n")
    if not ok:
        failures.append(("quantized divergence", cex))

    ok, cex = check_io_stability(trials, seed)
    out.write(f"serial/AER trace stability:  {'PASS' if ok else 'FAIL'}\n")
    if not ok:
        failures.append(("io stability", cex))

    ok, cex = check_round_trips(trials, seed)
    out.write(f"encoding round-trips:        {'PASS' if ok else 'FAIL'}\n")
    if not ok:
        failures.append(("round-trips", cex))

    ok, cex = check_fire_boundary()
    out.write(f"threshold boundary fires:    {'PASS' if ok else 'FAIL'}\n")
    if not ok:
        failures.append(("threshold boundary", cex))

    for name, cex in failures:
        out.write(f"FAILED {name}: first counterexample (trial, step) = {cex}\n")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lifsim",
        description="Bit-accurate simulator of six digital LIF neuron "
                    "hardware variants with latency/power/energy models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a spike-train file")
    p.add_argument("--preset", choices=sorted(stimulus.PRESETS))
    p.add_argument("--temporal", type=float)
    p.add_argument("--input", type=float)
    p.add_argument("--channels", type=int, default=8)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("characterize", help="measure densities of a train file")
    p.add_argument("train")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("run", help="run one architecture over a train file")
    p.add_argument("train")
    p.add_argument("--mode", choices=("clock", "event"), default="clock")
    p.add_argument("--decay", choices=("mult", "shift"), default="mult")
    p.add_argument("--io", choices=("serial", "aer"), default="serial")
    p.add_argument("--reset", choices=("zero", "subtract"), default="zero")
    p.add_argument("--beta", type=float)
    p.add_argument("--beta-shift", type=int)
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("--weights", help="comma-separated raw weight values")
    p.add_argument("--bias", type=int)
    p.add_argument("--trace", action="store_true",
                   help="append per-step trace rows")
    p.add_argument("--model-config", help="cycle/energy parameter file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="density sweep over all six architectures")
    p.add_argument("--temporal", help="comma-separated temporal densities")
    p.add_argument("--input", help="comma-separated input densities")
    p.add_argument("--channels", type=int, default=8)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD)
    p.add_argument("--weights", help="comma-separated raw weight values")
    p.add_argument("--model-config", help="cycle/energy parameter file")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the oracle-equivalence suites")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lut", help="dump a decay table as CSV")
    p.add_argument("--beta", type=float)
    p.add_argument("--beta-shift", type=int)
    p.add_argument("--lut-mode", choices=("exact", "pow2"), default="exact")
    p.add_argument("--max-dt", type=int, default=127)
    p.add_argument("--beta-frac", type=int, default=8)
    p.set_defaults(func=cmd_lut)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "mode", None) == "clock" and getattr(args, "io", None) == "aer":
        parser.error("clock-driven mode cannot use address-event input")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
