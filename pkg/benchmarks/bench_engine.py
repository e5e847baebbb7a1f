"""Compare the numba kernels with the pure-numpy fallback.

Each workload runs in a fresh interpreter, once with PARPLAN_NO_JIT=0 and
once with PARPLAN_NO_JIT=1.  The JIT run is repeated so the first (compiling)
run can be told apart from a warm one; kernels are cached on disk.

    python benchmarks/bench_engine.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
DATA = HERE.parent / "tests" / "data"

WORKLOADS = {
    "pigeonhole-7": """
from parplan.engine import Engine
e = Engine()
p = [[e.new_var() for _ in range(7)] for _ in range(8)]
for row in p:
    e.add_clause(row)
for h in range(7):
    e.add_amo([row[h] for row in p])
out = e.solve()
result = (out.status.value, out.stats.conflicts)
""",
    "bw4-exists": f"""
from parplan.pddl import pddl_to_task
from parplan.planner import PlannerConfig, plan
dom = open({str(DATA / 'bw-domain.pddl')!r}).read()
prob = open({str(DATA / 'bw4-problem.pddl')!r}).read()
r = plan(pddl_to_task(dom, prob), PlannerConfig())
result = (r.horizon, r.stats['conflicts'])
""",
    "bw6-seq": f"""
from parplan.encoder import Mode
from parplan.pddl import pddl_to_task
from parplan.planner import PlannerConfig, plan
dom = open({str(DATA / 'bw-domain.pddl')!r}).read()
prob = open({str(DATA / 'bw6-problem.pddl')!r}).read()
r = plan(pddl_to_task(dom, prob), PlannerConfig(mode=Mode.SEQ))
result = (r.horizon, r.stats['conflicts'])
""",
}

RUNNER = """
import json, time
t0 = time.perf_counter()
{body}
print(json.dumps({{"seconds": time.perf_counter() - t0, "result": list(result)}}))
"""


def run(body, no_jit):
    env = dict(os.environ, PARPLAN_NO_JIT="1" if no_jit else "0")
    r = subprocess.run([sys.executable, "-c", RUNNER.format(body=body)], env=env, capture_output=True,
                       text=True, check=True)
    return json.loads(r.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--only", choices=sorted(WORKLOADS), action="append")
    args = ap.parse_args(argv)
    print(f"{'workload':<14} {'jit first':>10} {'jit best':>10} {'no-jit':>10} {'speedup':>8}  result")
    for name in args.only or WORKLOADS:
        body = WORKLOADS[name]
        jit = [run(body, False) for _ in range(args.repeat)]
        plain = run(body, True)
        if any(j["result"] != plain["result"] for j in jit):
            print(f"{name}: results differ: {jit[0]['result']} vs {plain['result']}")
            return 1
        best = min(j["seconds"] for j in jit)
        print(f"{name:<14} {jit[0]['seconds']:>9.3f}s {best:>9.3f}s {plain['seconds']:>9.3f}s "
              f"{plain['seconds'] / best:>7.1f}x  {plain['result']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
