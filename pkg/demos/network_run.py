"""One billing cycle over loopback TCP with a process per party.

Starts the retailer, two auditors and eight meters from deployment.toml
in a scratch directory, prints each verdict and checks the board file.
Pass a scenario name (e.g. FORGE_ROOT) to run a cheating retailer.
"""

import shutil
import socket
import subprocess
import sys
import tempfile
import time
from pathlib import Path

HERE = Path(__file__).resolve().parent
PPTP = [sys.executable, "-m", "pptp"]


def wait_for_port(port, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        with socket.socket() as s:
            if s.connect_ex(("127.0.0.1", port)) == 0:
                return
        time.sleep(0.1)
    raise SystemExit("retailer did not come up")


def main(argv):
    work = Path(tempfile.mkdtemp(prefix="pptp-"))
    cfg = work / "deployment.toml"
    shutil.copy(HERE / "deployment.toml", cfg)
    port = 7700
    retailer_cmd = PPTP + ["run", "retailer", "--config", str(cfg)]
    if argv:
        retailer_cmd += ["--tamper", argv[0], "--user", "2", "--period", "1"]
    retailer = subprocess.Popen(retailer_cmd)
    wait_for_port(port)
    auditors = [
        subprocess.Popen(PPTP + ["run", "auditor", "--config", str(cfg), "--index", str(j)])
        for j in range(2)
    ]
    clients = [
        subprocess.Popen(PPTP + ["run", "client", "--config", str(cfg), "--index", str(i),
                                 "--verdict", str(work / f"client{i}.txt")])
        for i in range(8)
    ]
    codes = [p.wait() for p in clients]
    for p in auditors:
        p.wait()
    retailer.wait()
    for i, code in enumerate(codes):
        print(f"client {i}: {['accept', 'reject', 'unreachable'][code]}")
    subprocess.run(PPTP + ["board", "verify", str(work / "board.log")], check=False)
    print(f"artifacts in {work}")


if __name__ == "__main__":
    main(sys.argv[1:])
