#!/usr/bin/env python3
"""Download the public 2021 ICD-10-CM code-descriptions archive from CMS
and extract the tabular-order file used by the diagnosis taxonomy loader.

Usage: python scripts/fetch_icd10cm_2021.py [dest_dir]

Writes data/icd10cm_order_2021.txt (by default), the path the test suite
looks for. Needs outbound network access, so run it outside sandboxed
environments and copy the file in.
"""

import io
import sys
import urllib.request
import zipfile
from pathlib import Path

URL = "https://www.cms.gov/files/zip/2021-code-descriptions-tabular-order.zip"
MEMBER = "icd10cm_order_2021.txt"


def main() -> int:
    dest_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data"
    dest_dir.mkdir(parents=True, exist_ok=True)
    dest = dest_dir / MEMBER

    print(f"downloading {URL} ...")
    with urllib.request.urlopen(URL) as resp:
        payload = resp.read()
    print(f"got {len(payload) / 1e6:.1f} MB")

    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        names = zf.namelist()
        member = next((n for n in names if n.lower().endswith(MEMBER)), None)
        if member is None:
            print(f"archive does not contain {MEMBER}; it has: {names}", file=sys.stderr)
            return 1
        dest.write_bytes(zf.read(member))

    print(f"wrote {dest}")
    print("the acceptance suite picks it up there, or via NEXTACT_ICD10CM_ORDER")
    return 0


if __name__ == "__main__":
    sys.exit(main())
