"""The undetected interception: loss cheating plus deferred measurement.

On a lossy channel (honest efficiency eta) the dishonest agent replaces the
link with a better one (eta_prime), intercepts both photons, forwards a fake
entangled half, and defers his Bell measurement until the round's role is
announced.  Repairable outcomes are answered honestly; unrepairable ones are
declared as losses.  Declared losses are indistinguishable from channel
losses, so the checks see zero errors and the advertised efficiency, while
the adversary reads off the dealer's key and the other agent's key exactly.

Run:
    python demos/loss_cheating_attack.py [--rounds N] [--seed N]
"""

import argparse

from triqss.harness import preset_experiment, run_experiment
from triqss.protocol import RoundKind
from triqss.stats import ratio


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rounds", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--eta", type=float, default=0.3)
    parser.add_argument("--eta-prime", type=float, default=0.6)
    args = parser.parse_args()

    config = preset_experiment(
        "opaque-vulnerable",
        eta=args.eta,
        eta_prime=args.eta_prime,
        rounds=args.rounds,
        seed=args.seed,
    )
    report = run_experiment(config, keep_transcripts=True)
    check = report.check
    tally = report.tally

    print(f"channel: honest eta={args.eta}, adversary eta_prime={args.eta_prime}")
    print(f"planned attack fraction : {report.planned_attack_fraction:.3f}")
    print(f"measured attack fraction: {report.attacked_fraction_observed:.3f}")
    print()
    print("What the honest checks see:")
    print(f"  test errors          : {check.test_errors} "
          f"(rate {check.test_error_rate:.4f})")
    loss_frac = ratio(tally.attacked_test_loss_declared, tally.attacked_test_mounted)
    print(f"  declared-loss share  : {loss_frac:.3f} of attacked test rounds")
    print(f"  efficiency, far leg  : {check.observed_efficiency_charlie:.4f} "
          f"(advertised {args.eta})")
    print(f"  verdict              : {check.verdict}")
    print()
    print("What the adversary walks away with:")
    print(f"  dealer bits recovered: {tally.dealer_bit_recoveries} "
          f"(accuracy {report.ka_accuracy:.3f})")
    print(f"  agent bits recovered : {tally.charlie_bit_recoveries} "
          f"(accuracy {report.kc_accuracy:.3f})")

    rounds = report.transcripts[0].rounds
    truth, guess = [], []
    for rec in rounds:
        if rec.kind is RoundKind.KEY and rec.recovered_dealer_bit is not None:
            truth.append(rec.preparation.bit)
            guess.append(rec.recovered_dealer_bit)
            if len(truth) == 40:
                break
    print(f"\n  dealer's key bits : {''.join(map(str, truth))}")
    print(f"  adversary's read  : {''.join(map(str, guess))}")
    print("\nZero errors, advertised loss rate, full key recovery: the attack")
    print("is invisible whenever eta_prime >= 2 * eta.")


if __name__ == "__main__":
    main()
