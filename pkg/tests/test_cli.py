"""End-to-end CLI checks, including the documented exit codes."""

from __future__ import annotations

import subprocess
import sys

PRICES = "date,price\n2020-01-01,40\n2020-07-01,50\n"

ISSUE_ARGS = [
    "issue",
    "--issuer", "LME",
    "--material", "copper",
    "--face-weight", "1000",
    "--purity", "0.9999",
    "--issue-date", "2020-01-01",
    "--theta", "0.99996",
    "--denominations", "1,10,100,1000",
    "--delivery-charge", "0.003",
    "--withdrawal-charge", "0.002",
    "--min-delivery", "1000",
    "--owner", "client-1",
]

FAILING_SCENARIO = """\
name: failing
issue_date: 2020-01-01
issuer:
  id: X
  material: tin
  denominations: [5]
  theta: 0.9999
  delivery_rules:
    delivery_charge_ratio: 0.003
    withdrawal_charge_ratio: 0.002
    min_delivery_weight: 5
script:
  - {dt: 0, action: issue, cert: c1, face_weight: 5, owner: a}
  - {dt: 1, action: deliver, cert: c1}
  - {dt: 2, action: deliver, cert: c1}
"""


def dcm(*args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "dcm.cli", *args],
        cwd=cwd,
        capture_output=True,
        text=True,
        timeout=120,
    )


class TestTheta:
    def test_warehouse_only_prints_six_decimals(self, tmp_path):
        result = dcm("theta", "--warehouse-charge", "0.2", "--cif", "5000", cwd=tmp_path)
        assert result.returncode == 0
        assert result.stdout.strip() == "0.999960 (warehouse-only)"

    def test_interest_credited_pathology_exits_validation(self, tmp_path):
        result = dcm(
            "theta", "--warehouse-charge", "0.2", "--cif", "5000",
            "--bank-rate", "0.0365", "--mode", "interest-credited",
            cwd=tmp_path,
        )
        assert result.returncode == 2
        assert "1.000060" in result.stderr

    def test_zero_tariffs_exit_validation(self, tmp_path):
        result = dcm("theta", "--warehouse-charge", "0", "--cif", "5000", cwd=tmp_path)
        assert result.returncode == 2


class TestLifecycleFlow:
    def test_issue_quote_deliver_and_verify(self, tmp_path):
        (tmp_path / "prices.csv").write_text(PRICES, encoding="utf-8")

        issued = dcm(*ISSUE_ARGS, cwd=tmp_path)
        assert issued.returncode == 0
        assert "code: LME-copper-0001" in issued.stdout
        assert "theta: 0.999960" in issued.stdout

        quoted = dcm(
            "--prices", "prices.csv", "--price-per-units", "1000",
            "quote", "--cert", "LME-copper-0001", "--dt", "183",
            cwd=tmp_path,
        )
        assert quoted.returncode == 0
        assert "residual_weight: 992.7066" in quoted.stdout

        delivered = dcm("deliver", "--cert", "LME-copper-0001", "--dt", "365", cwd=tmp_path)
        assert delivered.returncode == 0
        assert "delivered_weight: 982.5493" in delivered.stdout

        verified = dcm("replay-verify", cwd=tmp_path)
        assert verified.returncode == 0
        assert "ok: 3 events, 1 certificates" in verified.stdout

    def test_settling_twice_exits_settlement(self, tmp_path):
        dcm(*ISSUE_ARGS, cwd=tmp_path)
        assert dcm("deliver", "--cert", "LME-copper-0001", "--dt", "10", cwd=tmp_path).returncode == 0
        result = dcm("deliver", "--cert", "LME-copper-0001", "--dt", "20", cwd=tmp_path)
        assert result.returncode == 3
        assert "DELIVERED" in result.stderr

    def test_buyback_pays_cash(self, tmp_path):
        (tmp_path / "prices.csv").write_text(PRICES, encoding="utf-8")
        dcm(*ISSUE_ARGS, cwd=tmp_path)
        result = dcm(
            "--prices", "prices.csv", "--price-per-units", "1000",
            "buyback", "--cert", "LME-copper-0001", "--dt", "365",
            cwd=tmp_path,
        )
        assert result.returncode == 0
        assert "buyback_weight: 983.5348" in result.stdout

    def test_quote_without_prices_exits_validation(self, tmp_path):
        dcm(*ISSUE_ARGS, cwd=tmp_path)
        result = dcm("quote", "--cert", "LME-copper-0001", "--dt", "183", cwd=tmp_path)
        assert result.returncode == 2
        assert "--prices" in result.stderr

    def test_tampered_ledger_exits_integrity(self, tmp_path):
        dcm(*ISSUE_ARGS, cwd=tmp_path)
        ledger_file = tmp_path / "dcm-ledger.log"
        text = ledger_file.read_text(encoding="utf-8")
        position = text.index("1000.0")
        ledger_file.write_text(text[:position] + "9" + text[position + 1 :], encoding="utf-8")
        result = dcm("replay-verify", cwd=tmp_path)
        assert result.returncode == 4
        assert "hash mismatch" in result.stderr

    def test_missing_ledger_exits_validation(self, tmp_path):
        result = dcm("replay-verify", cwd=tmp_path)
        assert result.returncode == 2

    def test_unknown_certificate_exits_validation(self, tmp_path):
        (tmp_path / "prices.csv").write_text(PRICES, encoding="utf-8")
        dcm(*ISSUE_ARGS, cwd=tmp_path)
        result = dcm(
            "--prices", "prices.csv", "quote", "--cert", "ghost", "--dt", "1",
            cwd=tmp_path,
        )
        assert result.returncode == 2


class TestRun:
    def test_bundled_scenario_by_name(self, tmp_path):
        result = dcm("run", "lme_copper", cwd=tmp_path)
        assert result.returncode == 0
        assert "992.7066" in result.stdout

    def test_json_report_file(self, tmp_path):
        result = dcm("run", "shfe_steel", "--report", "out.jsonl", "--format", "json", cwd=tmp_path)
        assert result.returncode == 0
        report = (tmp_path / "out.jsonl").read_text(encoding="utf-8")
        assert result.stdout == report
        assert report.count("\n") == 6

    def test_failing_step_reports_its_index_and_kind(self, tmp_path):
        (tmp_path / "failing.yaml").write_text(FAILING_SCENARIO, encoding="utf-8")
        result = dcm("run", "failing.yaml", cwd=tmp_path)
        assert result.returncode == 3
        assert "step 3" in result.stderr

    def test_unknown_scenario_exits_validation(self, tmp_path):
        result = dcm("run", "not-a-scenario", cwd=tmp_path)
        assert result.returncode == 2

    def test_bad_flag_exits_validation(self, tmp_path):
        result = dcm("theta", "--warehouse-charge", "abc", "--cif", "5000", cwd=tmp_path)
        assert result.returncode == 2


class TestProject:
    def test_projection_output(self, tmp_path):
        result = dcm("project", "--weight", "4e8", "--theta", "0.999945", "--days", "3650", cwd=tmp_path)
        assert result.returncode == 0
        assert "residual_weight: 327244967.4214" in result.stdout
        assert "issuer_accrued_weight: 72755032.5786" in result.stdout
