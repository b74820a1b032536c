"""Stand-in for compiler programs in build tests.

Usage: mockprog.py MODE IN OUT [NAME]

IN and OUT are paths or ``-`` for stdin/stdout.  When OUT is a directory
the payload goes to OUT/NAME.  MODE is ``cat`` (copy), ``warn`` (copy and
complain on stderr) or ``fail`` (exit 3 without output).
"""

import os
import sys


def main(argv):
    mode, src, dst = argv[:3]
    if mode == "fail":
        sys.stderr.write("giving up\n")
        return 3
    data = sys.stdin.buffer.read() if src == "-" else open(src, "rb").read()
    if mode == "warn":
        sys.stderr.write("WARN line 3: foo\n")
    if dst == "-":
        sys.stdout.buffer.write(data)
    else:
        if os.path.isdir(dst):
            dst = os.path.join(dst, argv[3])
        with open(dst, "wb") as fh:
            fh.write(data)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
