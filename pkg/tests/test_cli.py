"""命令行子命令与退出码"""
import json

import pytest

from src.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, cli_main


@pytest.fixture
def output_dir(tmp_path):
    return tmp_path / "output"


def run(output_dir, *argv):
    return cli_main(['--output-dir', str(output_dir), *argv])


def test_kernel_table(output_dir, capsys):
    assert run(output_dir, 'kernel', '--lambda', '1', '--x', '1', '--y', '0') == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == 'lambda,x,y,kernel'
    assert lines[1] == '1.0,1.0,0.0,-1.273239545'
    assert (output_dir / 'kernel_manifest.json').exists()


def test_kernel_diagonal_is_nan(output_dir, capsys):
    assert run(output_dir, 'kernel', '--lambda', '1', '--x', '1', '--y', '1') == EXIT_OK
    assert capsys.readouterr().out.strip().splitlines()[1].endswith(',nan')


def test_kernel_csv_and_manifest_reproducible(output_dir, tmp_path):
    target = tmp_path / "kernel.csv"
    args = ('kernel', '--lambda', '0.5', '--x', '1,2', '--y', '0.5', '--output', str(target))
    assert run(output_dir, *args) == EXIT_OK
    first = (output_dir / 'kernel_manifest.json').read_bytes()
    assert run(output_dir, *args) == EXIT_OK
    assert (output_dir / 'kernel_manifest.json').read_bytes() == first
    assert len(target.read_text(encoding='utf-8').splitlines()) == 3


def test_variation_from_csv(output_dir, zigzag_csv, capsys):
    assert run(output_dir, 'variation', '--input', str(zigzag_csv)) == EXIT_OK
    out = capsys.readouterr().out
    assert 'V_3 = 2.884499141' in out
    assert 'Lambda(beta=1) = 3' in out


def test_czd_writes_json(output_dir, tmp_path):
    target = tmp_path / "czd.json"
    code = run(output_dir, 'czd', '--lambda', '1', '--function', 'indicator(0,1)', '--eta', '0.5',
               '--output', str(target))
    assert code == EXIT_OK
    data = json.loads(target.read_text(encoding='utf-8'))
    assert len(data['intervals']) == 1
    assert data['intervals'][0]['average'] == pytest.approx(1.0)
    assert data['report']['passed'] is True


@pytest.mark.parametrize("argv", [
    ['kernel'],
    ['kernel', '--lambda', '-1', '--x', '1', '--y', '0'],
    ['czd', '--lambda', '1', '--function', 'nope(1)', '--eta', '1'],
    ['no-such-command'],
])
def test_usage_errors(output_dir, argv):
    assert run(output_dir, *argv) == EXIT_USAGE


def test_verify_quick_end_to_end(output_dir, capsys):
    assert run(output_dir, 'verify', '--quick', '--suite', 'kernel_closed_form') == EXIT_OK
    assert (output_dir / "report.csv").exists()
    records = json.loads((output_dir / "report.json").read_text(encoding="utf-8"))
    assert len(records["rows"]) == 4
    assert records["summary"]["failed"] == 0
    assert (output_dir / "verify_manifest.json").exists()
    assert 'kernel_closed_form' in capsys.readouterr().out


def test_verify_frozen_needs_calibration(output_dir):
    argv = ['verify', '--quick', '--suite', 'measure_doubling']
    assert run(output_dir, *argv, '--frozen') == EXIT_FAILED
    assert run(output_dir, *argv, '--calibrate') == EXIT_OK
    assert run(output_dir, *argv, '--frozen') == EXIT_OK
    assert run(output_dir, *argv, '--calibrate', '--frozen') == EXIT_USAGE
