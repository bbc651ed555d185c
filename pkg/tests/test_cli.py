import json

from click.testing import CliRunner

from qseig.analysis import invariants
from qseig.data.read_api import read_state
from qseig.data.schemas import InvariantResult
from qseig.libs.version import __version__
from qseig.tools.cli import cli


def _invoke(*args):
    return CliRunner().invoke(cli, list(args))


def _write(tmp_path, text):
    path = tmp_path / 'run.conf'
    path.write_text(text, encoding='utf-8')
    return str(path)


def test_version():
    result = _invoke('--version')
    assert result.exit_code == 0
    assert __version__ in result.output


def test_missing_config_option():
    assert _invoke('solve').exit_code == 1


def test_missing_config_file(tmp_path):
    assert _invoke('solve', '-c', str(tmp_path / 'absent.conf')).exit_code == 1


def test_invalid_config_file(tmp_path):
    path = _write(tmp_path, 'n_eig = 2\nscheme.tau = abc\n')
    assert _invoke('solve', '-c', path).exit_code == 1


def test_solve_converges(tmp_path, config_file):
    report = tmp_path / 'report.json'
    result = _invoke('--serial', 'solve', '-c', config_file(f'outputs.report = {report}\n'))
    assert result.exit_code == 0, result.output
    assert 'terminated_by: tolerance_met' in result.output
    data = json.loads(report.read_text(encoding='utf-8'))
    assert data['terminated_by'] == 'tolerance_met'
    assert data['n_eig'] == 2
    assert max(data['final']['relative_errors']) < 1e-8


def test_solve_max_steps_writes_history(tmp_path, config_text):
    history = tmp_path / 'history.csv'
    text = config_text.replace('scheme.max_steps = 5000', 'scheme.max_steps = 1')
    result = _invoke('solve', '-c', _write(tmp_path, text + f'outputs.history_csv = {history}\n'))
    assert result.exit_code == 2
    lines = history.read_text(encoding='utf-8').splitlines()
    assert len(lines) == 2
    assert lines[0].startswith('step,energy,')
    assert lines[1].startswith('1,')


def test_solve_overrides(tmp_path, config_file):
    report = tmp_path / 'report.json'
    result = _invoke('solve', '-c', config_file(f'outputs.report = {report}\n'), '--tau', '0.5', '--seed', '5')
    assert result.exit_code in (0, 2)
    data = json.loads(report.read_text(encoding='utf-8'))
    assert data['tau'] == 0.5
    assert data['seed'] == 5


def test_solve_rejects_several_taus(config_file):
    assert _invoke('solve', '-c', config_file(), '--tau', '0.1,0.2').exit_code == 1


def test_sweep_needs_two_taus(config_file):
    assert _invoke('tau-sweep', '-c', config_file(), '--tau', '0.5').exit_code == 1


def test_reference(tmp_path, config_file):
    state = tmp_path / 'ref.qsev'
    report = tmp_path / 'ref.json'
    result = _invoke('reference', '-c', config_file(f'outputs.reference_state = {state}\n'
                                                    f'outputs.report = {report}\n'))
    assert result.exit_code == 0, result.output
    assert 'E_ref' in result.output
    assert read_state(str(state)).shape == (20, 2)
    data = json.loads(report.read_text(encoding='utf-8'))
    assert len(data['eigenvalues']) == 2


def test_solve_prints_step_bounds(config_file):
    result = _invoke('solve', '-c', config_file())
    assert result.exit_code == 0, result.output
    assert 'tau_quasi_stiefel=' in result.output
    assert 'tau_energy=' in result.output


def test_tau_sweep_succeeds(tmp_path, config_file):
    report = tmp_path / 'sweep.json'
    sweep = tmp_path / 'sweep.csv'
    result = _invoke('--serial', 'tau-sweep', '-c',
                     config_file(f'outputs.report = {report}\noutputs.sweep_csv = {sweep}\n'), '--tau', '1.0,2.0')
    assert result.exit_code == 0, result.output
    data = json.loads(report.read_text(encoding='utf-8'))
    assert data['tau_independent'] == [True, True]
    assert data['steps_decreasing']
    assert [run['terminated_by'] for run in data['runs']] == ['tolerance_met', 'tolerance_met']
    assert sweep.read_text(encoding='utf-8').splitlines()[0].startswith('index,')


def test_verify_passes(tmp_path, config_file):
    report = tmp_path / 'verify.json'
    result = _invoke('--serial', 'verify', '-c', config_file(f'outputs.report = {report}\n'))
    assert result.exit_code == 0, result.output
    data = json.loads(report.read_text(encoding='utf-8'))
    assert data['passed']
    names = {r['name'] for r in data['results']}
    assert 'orthogonalité finale' in names
    assert 'déterminisme du run' in names
    assert 'inégalité triangulaire de distance_a' in names


def test_verify_reports_a_failed_invariant(config_file, monkeypatch):
    failing = [InvariantResult(name="cohérence de l'oracle", passed=False, slack=-1.0, detail='', gating=True)]
    monkeypatch.setattr(invariants, 'oracle_invariants', lambda *args, **kwargs: failing)
    result = _invoke('verify', '-c', config_file())
    assert result.exit_code == 4
    assert '[FAIL]' in result.output
