"""Stand-in for a commercial formal tool: runs a batch job with the built-in checker.

Usage: mock_formal_tool.py <job script> <log file>
"""

import shlex
import sys

from proofloop.candidate import SvaCandidate
from proofloop.design import Design
from proofloop.solver.checker import Budget, prove
from proofloop.solver.external import render_log


def read_bind(path):
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith(("module ", "endmodule", "bind ")):
                continue
            label, text = line.split(":", 1)
            items.append((label.strip(), text.strip()))
    return items


def main(argv):
    script, log = argv[1], argv[2]
    files, top, depth, wall = [], None, 32, 30.0
    with open(script, encoding="utf-8") as fh:
        for line in fh:
            words = shlex.split(line, comments=True)
            if not words:
                continue
            if words[0] == "analyze":
                files = [w for w in words[1:] if not w.startswith("-")]
            elif words[0] == "elaborate":
                top = words[words.index("-top") + 1]
            elif words[0] == "set_max_trace_length":
                depth = int(words[1])
            elif words[0] == "set_prove_time_limit":
                wall = float(words[1].rstrip("s"))
    *rtl, sva = files
    design = Design.from_paths(rtl, top)
    cand = SvaCandidate(read_bind(sva), top)
    result = prove(design, cand, Budget(depth=depth, wall_time=wall))
    with open(log, "w", encoding="utf-8") as fh:
        fh.write(render_log(result))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
