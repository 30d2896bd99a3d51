"""Smoke test for the Python bindings. Run after `pip install --no-build-isolation -e crates/py`."""

import json
from decimal import Decimal
from pathlib import Path

import cloudcost

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def read(name):
    return (FIXTURES / name).read_text()


def main():
    assert cloudcost.parse_patterns("perm: every month +10") == ["perm: every month +10"]
    try:
        cloudcost.parse_patterns("temp: every sep-nov +")
    except ValueError as e:
        assert "position" in str(e), e
    else:
        raise AssertionError("bad pattern accepted")

    dec = cloudcost.daily_series(100, "perm: every month +10, temp: every dec on 25-30 *2", "2010-01", "2010-12")
    assert len(dec) == 31 and dec[23] == 210 and dec[24] == 420

    assert cloudcost.validate_model(read("school-elastic.cloudmodel.json")) == []

    catalog = read("aws-2010-eu.prices.json")
    report = cloudcost.simulate(read("school-elastic.cloudmodel.json"), catalog, "2010-09", "2016-08", discount_rate="0.05")
    again = cloudcost.simulate(read("school-elastic.cloudmodel.json"), catalog, "2010-09", "2016-08", discount_rate="0.05")
    assert report.report_id == again.report_id and len(report.report_id) == 64
    assert len(report.monthly_totals()) == 72
    assert report.to_csv().startswith("month,element_id,resource")
    assert "<svg" in report.to_html()
    assert json.loads(report.to_json())["schema"] == 1

    assert cloudcost.npv({1: "105"}, "0.05") == "100"
    buy = cloudcost.on_premise_flows(read("school-buy.onprem.json"), 6)
    assert buy[0] == "22869", buy
    elastic = report.yearly()
    cmp = json.loads(cloudcost.compare_options([("buy", buy), ("elastic", elastic)], "0.05", "buy"))
    ranked = [r["label"] for r in cmp["ranking"]]
    assert ranked == ["buy", "elastic"], ranked
    ratio = Decimal(report.npv) / Decimal(cmp["ranking"][0]["npv"])
    assert Decimal(1) < ratio <= Decimal("1.2"), ratio

    outcome = json.loads(cloudcost.assess(read("oilgas.assessment.json")))
    assert outcome["recommendation"]["verdict"] == "proceed-with-caution", outcome

    print(f"ok: {report!r}, elastic/buy = {ratio:.3f}")


if __name__ == "__main__":
    main()
