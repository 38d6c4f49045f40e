"""Adapter for the public Criteo attribution-modeling export.

That file marks conversions as a flag repeated on every impression row
of a converting journey, alongside a conversion timestamp. The toolkit's
canonical format instead carries one conversion-event row per converted
journey, so this adapter emits every impression as a touch row and
appends a synthetic conversion row per (uid, conversion_id) at the
recorded conversion timestamp. Campaign stands in for channel since the
export has no channel column.
"""

from __future__ import annotations

import logging

log = logging.getLogger(__name__)

SOURCE_COLUMNS = {
    "timestamp", "uid", "campaign", "conversion", "conversion_timestamp",
    "conversion_id", "click", "cost",
}

OUTPUT_HEADER = ["uid", "ts", "channel", "click", "cost", "conversion",
                 "cat1", "cat2", "cat3", "cat4", "cat5", "cat6", "cat7",
                 "cat8", "cat9"]

SCHEMA = {
    "user": "uid",
    "timestamp": "ts",
    "channel": "channel",
    "click": "click",
    "cost": "cost",
    "conversion": "conversion",
    "features": ["cat1", "cat2", "cat3", "cat4", "cat5", "cat6", "cat7",
                 "cat8", "cat9"],
    "delimiter": "\t",
}


def convert_criteo(src_path, dst_path, delimiter: str = "\t") -> int:
    """Rewrite a Criteo-style export into the canonical event-row format.

    Returns the number of conversion rows emitted. Rows with unparsable
    numerics are skipped with a warning.
    """
    conversions: dict[tuple[str, str], float] = {}
    rows: list[tuple[float, int, list[str]]] = []
    skipped = 0
    with open(src_path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n").split(delimiter)
        col = {name: i for i, name in enumerate(header)}
        missing = SOURCE_COLUMNS - set(col)
        if missing:
            raise ValueError(f"source file lacks columns {sorted(missing)}")
        cat_cols = [c for c in header if c.startswith("cat")][:9]
        for order, line in enumerate(fh):
            cells = line.rstrip("\r\n").split(delimiter)
            if len(cells) != len(header):
                skipped += 1
                continue
            try:
                ts = float(cells[col["timestamp"]])
                uid = cells[col["uid"]]
                click = int(float(cells[col["click"]]))
                cost = max(0.0, float(cells[col["cost"]]))
                conv = int(float(cells[col["conversion"]]))
            except ValueError:
                skipped += 1
                continue
            cats = [cells[col[c]] if c in col else "-1" for c in cat_cols]
            cats += ["-1"] * (9 - len(cats))
            out = [uid, f"{ts:.10g}", cells[col["campaign"]], str(click),
                   f"{cost:.10g}", "0"] + cats
            rows.append((ts, order, out))
            if conv == 1:
                conv_id = cells[col["conversion_id"]]
                try:
                    conv_ts = float(cells[col["conversion_timestamp"]])
                except ValueError:
                    conv_ts = ts
                key = (uid, conv_id)
                conversions[key] = max(conversions.get(key, conv_ts), conv_ts, ts)

    for n, ((uid, _), conv_ts) in enumerate(sorted(conversions.items())):
        out = [uid, f"{conv_ts:.10g}", "conversion", "0", "0", "1"] + ["-1"] * 9
        rows.append((conv_ts, 10**9 + n, out))
    if skipped:
        log.warning("skipped %d malformed source rows", skipped)

    rows.sort(key=lambda r: (r[2][0], r[0], r[1]))
    with open(dst_path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(OUTPUT_HEADER) + "\n")
        for _, _, out in rows:
            fh.write("\t".join(out) + "\n")
    return len(conversions)
