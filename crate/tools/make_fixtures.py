#!/usr/bin/env python3
"""Regenerates the fixture files under fixtures/.

The 2023-12-31 snapshot positions are sized so that the liquidity schedule
reproduces the published funding-gap table to the unit. Vault and holder
histories are synthetic but seeded, so reruns are byte-identical.
"""
import datetime as dt
import random
from decimal import Decimal, getcontext
from pathlib import Path

getcontext().prec = 40
ROOT = Path(__file__).resolve().parent.parent / "fixtures"

# Published outflows per bucket; their total equals total assets.
OUTFLOWS = [988_496_652, 603_190_592, 333_981_595, 3_295_302_537]
TOTAL = sum(OUTFLOWS)


def q(x, places="0.01"):
    return str(Decimal(x).quantize(Decimal(places)))


def snapshot():
    assets = [
        dict(id="crypto-vaults-fast", cls="crypto_backed_loan", exposure="1228440892", mat="0",
             tenor="week", ref="vaults-2023-12-31.toml"),
        dict(id="crypto-vaults-slow", cls="crypto_backed_loan", exposure="1151811411", mat="0",
             tenor="month", ref="vaults-2023-12-31.toml"),
        dict(id="tbill-ladder", cls="public_credit", exposure="2317000000", mat="0.257", tenor="month"),
        dict(id="psm-usdc", cls="stablecoin", exposure="260424144", mat="0", tenor="day"),
        dict(id="sg-forge-covered-bond", cls="private_credit", exposure="30000000.00", mat="4.45",
             rating="aaa", tenor="year"),
        dict(id="community-bank-mortgages", cls="private_credit", exposure="46052073.02", mat="4.45",
             rating="unrated", tenor="year"),
        dict(id="rwa-private-credit", cls="private_credit", exposure="187242855.98", mat="4.45",
             rating="unrated", tenor="year"),
    ]
    total = sum(Decimal(a["exposure"]) for a in assets)
    assert total == TOTAL, total
    equity = Decimal("53400000")
    dsr = Decimal("1592000000")
    dai = total - equity - dsr
    out = ["schema_version = 1", 'as_of = "2023-12-31"', ""]
    for a in assets:
        out.append("[[assets]]")
        out.append(f'id = "{a["id"]}"')
        out.append(f'class = "{a["cls"]}"')
        out.append(f'exposure = "{a["exposure"]}"')
        out.append(f'avg_maturity = "{a["mat"]}"')
        if "rating" in a:
            out.append(f'rating = "{a["rating"]}"')
        out.append(f'liquidity_tenor = "{a["tenor"]}"')
        if "ref" in a:
            out.append(f'collateral_ref = "{a["ref"]}"')
        out.append("")
    for lid, kind, amt in [("dai", "circulating_stablecoin", dai), ("dsr", "savings_deposit", dsr),
                           ("surplus-buffer", "equity", equity)]:
        out += ["[[liabilities]]", f'id = "{lid}"', f'kind = "{kind}"', f'amount = "{amt}"', ""]
    return "\n".join(out)


def vaults():
    rng = random.Random(20231231)
    price = Decimal("2281.47")
    target = Decimal(2_380_252_303)
    types = [("1.45", "0.13"), ("1.30", "0.13"), ("1.70", "0.13"), ("1.50", "0.13"), ("1.60", "0.13")]
    raw = [rng.lognormvariate(0, 1.2) for _ in range(60)]
    scale = target / Decimal(str(sum(raw)))
    debts = [(Decimal(str(r)) * scale).quantize(Decimal("0.01")) for r in raw]
    debts[-1] += target - sum(debts)
    out = ["schema_version = 1", 'name = "eth-vaults"', 'market_depth = "100000000"',
           'slippage_coefficient = "0.5"', ""]
    for i, debt in enumerate(debts):
        lr, pen = types[i % len(types)]
        cr = Decimal(lr) + Decimal(str(round(rng.lognormvariate(-0.2, 0.7), 4)))
        units = (debt * cr / price).quantize(Decimal("0.000001"), rounding="ROUND_UP")
        out += ["[[vaults]]", f'id = "vault-{i:03}"', f'collateral_units = "{units}"',
                f'collateral_price = "{price}"', f'debt = "{debt}"', f'liquidation_ratio = "{lr}"',
                f'liquidation_penalty = "{pen}"', ""]
    return "\n".join(out)


def holders(start, end, final_total, seed, crash=None):
    """Daily balances; `crash` = (first_day, days, depth) hits contract holders."""
    rng = random.Random(seed)
    kinds = ["contract", "contract", "contract", "externally_owned", "externally_owned",
             "externally_owned", "externally_owned", "contract"]
    days = (end - start).days + 1
    weights = [rng.uniform(0.5, 2.0) for _ in kinds]
    wsum = sum(weights)
    finals = [Decimal(final_total) * Decimal(str(w / wsum)) for w in weights]
    finals = [f.quantize(Decimal("0.01")) for f in finals]
    finals[-1] += Decimal(final_total) - sum(finals)
    out = ["schema_version = 1", ""]
    for h, (kind, final) in enumerate(zip(kinds, finals)):
        vol = 0.02 if kind == "contract" else 0.004
        path = [1.0]
        for d in range(1, days):
            day = start + dt.timedelta(days=d)
            step = rng.gauss(0, vol)
            if crash and kind == "contract" and crash[0] <= day < crash[0] + dt.timedelta(days=crash[1]):
                step -= crash[2] / crash[1]
            path.append(path[-1] * (1 + step))
        scale = float(final) / path[-1]
        series = []
        for d, level in enumerate(path):
            day = start + dt.timedelta(days=d)
            bal = final if d == days - 1 else Decimal(str(level * scale)).quantize(Decimal("0.01"))
            series.append(f'["{day.isoformat()}", "{bal}"]')
        out += ["[[holders]]", f'address_id = "0x{h:040x}"', f'holder_kind = "{kind}"',
                "balances = [", *["  " + s + "," for s in series], "]", ""]
    return "\n".join(out)


def overrides():
    cum = 0
    lines = []
    for name, amount in zip(["day", "week", "month"], OUTFLOWS[:3]):
        cum += amount
        lines.append(f'{name} = "{(Decimal(cum) / Decimal(TOTAL)).quantize(Decimal("1e-26"))}"')
    return "\n".join(lines)


def scenario():
    return f"""schema_version = 1
rate_shock_bps = "200"
stablecoin_credit_default = "0.01"

[credit_rating_table]
aaa = "0.01"
unrated = "0.10"

[credit_class_overrides]
public_credit = "0"

[credit_position_overrides]
community-bank-mortgages = "0.05"

[monte_carlo]
n_paths = 10000
horizon_days = 30
daily_volatility = "0.0307"
daily_drift = "0"
jump_probability = "0"
jump_size = "0"
seed = 20231231
loss_statistic = "mean"

[liquidity]
split_by_class = false

[liquidity.outflow_overrides]
{overrides()}

[liquidity.haircuts]
stablecoin = "0"
cash = "0"
crypto_backed_loan = "0"
public_credit = "0"
private_credit = "0"
other = "0"

[tolerances]
balance = "1"
reference = "100000"

[capital]
status_threshold = "1"

[reference]
total_car = "128900000"

[reference.class_car]
crypto_backed_loan = "68200000"
public_credit = "11900000"
stablecoin = "2600000"
private_credit = "44700000"
"""


def main():
    maker = ROOT / "makerdao-2023-12-31"
    maker.mkdir(parents=True, exist_ok=True)
    (maker / "snapshot.toml").write_text(snapshot())
    (maker / "vaults-2023-12-31.toml").write_text(vaults())
    (maker / "holders.toml").write_text(
        holders(dt.date(2022, 4, 1), dt.date(2023, 12, 31), 5_167_571_376, 7,
                crash=(dt.date(2022, 5, 9), 5, 0.35)))
    (maker / "scenario.toml").write_text(scenario())


if __name__ == "__main__":
    main()
