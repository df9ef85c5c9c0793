"""Walk through the discretization of a single flow action.

A flow `do {a' = 1} until (a <= 2)` evolves a at unit rate while the bound
holds. With a 2-unit tick the compiler turns it into a bounded loop whose
look-ahead stops it the moment one more iteration would land outside the
bound two ticks from now.
"""

from fractions import Fraction

from tickflow import RewriteConfig, parse, pretty_print, rewrite_flows, run, to_csv

SOURCE = """\
cont a = 0;
do {a' = 1} until (a <= 2)
"""


def main() -> None:
    cfg = RewriteConfig(Fraction(2))
    program = parse(SOURCE)
    rewritten = rewrite_flows(program, cfg)

    print("source:")
    print(SOURCE)
    print("rewritten:")
    print(pretty_print(rewritten))

    trace = run(rewritten, cfg, max_ticks=10)
    print(to_csv(trace))
    print(f"terminated after tick {trace.effective_termination_tick}, "
          f"a = {trace.final_cont('a')}")

    # the kernel can also interpret the flow natively; the traces agree
    native = run(program, cfg, max_ticks=10, native_flows=True)
    assert native.final_cont("a") == trace.final_cont("a")
    print("native interpretation agrees")


if __name__ == "__main__":
    main()
