import numpy as np
import pytest

from skinlink.exceptions import AttenuationTableError, WavelengthRangeError
from skinlink.models import RunConfig
from skinlink.services.skin_attenuation import SkinAttenuationTable, alpha_at, load_table


def write_table(tmp_path, body: str):
    path = tmp_path / "alpha.csv"
    path.write_text(body, encoding="utf-8")
    return path


def test_bundled_table_covers_visible_to_near_infrared(default_table):
    assert default_table.min_wavelength == pytest.approx(400e-9)
    assert default_table.max_wavelength == pytest.approx(1500e-9)
    assert default_table.metadata


def test_load_table_converts_to_si(tmp_path):
    path = write_table(
        tmp_path,
        "# source: unit test\n"
        "wavelength_nm,alpha_per_mm\n"
        "800,0.5\n"
        "# interior comment\n"
        "\n"
        "1000,0.25\n",
    )
    table = load_table(path)
    assert table.wavelengths == pytest.approx((800e-9, 1000e-9))
    assert table.alphas == pytest.approx((500.0, 250.0))
    assert table.metadata == "unit test"


def test_alpha_exact_at_samples_and_linear_between(tmp_path):
    table = load_table(write_table(tmp_path, "wavelength_nm,alpha_per_mm\n800,0.5\n1000,0.25\n"))
    assert alpha_at(table, 800e-9) == 500.0
    assert alpha_at(table, 1000e-9) == 250.0
    assert alpha_at(table, 900e-9) == pytest.approx(375.0)


def test_alpha_vectorised(default_table):
    wavelengths = np.array(default_table.wavelengths)
    assert np.array_equal(alpha_at(default_table, wavelengths), np.array(default_table.alphas))


@pytest.mark.parametrize("wavelength", [399e-9, 1501e-9, float("nan")])
def test_no_extrapolation(default_table, wavelength):
    with pytest.raises(WavelengthRangeError):
        alpha_at(default_table, wavelength)


@pytest.mark.parametrize(
    "body, line",
    [
        ("wavelength_nm,alpha_per_mm\n800,0.5\n800,0.4\n", 3),
        ("wavelength_nm,alpha_per_mm\n900,0.5\n800,0.4\n", 3),
        ("wavelength_nm,alpha_per_mm\n800,-0.5\n900,0.4\n", 2),
        ("wavelength_nm,alpha_per_mm\n800,abc\n900,0.4\n", 2),
        ("# comment\nwavelength,alpha\n800,0.5\n", 2),
        ("wavelength_nm,alpha_per_mm\n800,0.5,1\n", 2),
    ],
)
def test_parse_errors_report_the_line(tmp_path, body, line):
    path = write_table(tmp_path, body)
    with pytest.raises(AttenuationTableError) as excinfo:
        load_table(path)
    assert excinfo.value.line == line
    assert f"{path}:{line}:" in str(excinfo.value)


def test_single_sample_rejected(tmp_path):
    with pytest.raises(AttenuationTableError):
        load_table(write_table(tmp_path, "wavelength_nm,alpha_per_mm\n800,0.5\n"))


def test_missing_file(tmp_path):
    with pytest.raises(AttenuationTableError, match="not found"):
        load_table(tmp_path / "missing.csv")


def test_samples_outside_supported_band_rejected():
    with pytest.raises(AttenuationTableError):
        SkinAttenuationTable.from_samples([(250e-9, 1.0), (800e-9, 1.0)])


def test_average_snr_transmission_window(service):
    """High-SNR window over 900-1300 nm with a water-absorption dip near 1450 nm."""
    config = RunConfig()

    def avg_snr_db(nm: float) -> float:
        return service.evaluate(config.with_updates(wavelength=nm)).avg_snr_db

    window = [avg_snr_db(nm) for nm in range(900, 1301, 25)]
    outside = [avg_snr_db(nm) for nm in list(range(400, 651, 25)) + list(range(1400, 1501, 25))]
    assert min(window) > max(outside)
    assert avg_snr_db(1450) < avg_snr_db(1400)
    assert avg_snr_db(1450) < avg_snr_db(1500)
    peak = max(range(700, 1501, 10), key=avg_snr_db)
    assert 1000 <= peak <= 1200


def test_table_edges_are_reachable_from_si_and_run_config(default_table, service):
    assert alpha_at(default_table, 400e-9) == default_table.alphas[0]
    assert alpha_at(default_table, 1500e-9) == default_table.alphas[-1]
    assert default_table.min_wavelength == 400e-9
    for nm in (400, 1500):
        report = service.evaluate(RunConfig(wavelength=f"{nm}nm"))
        assert report.wavelength_nm == pytest.approx(nm)
    assert RunConfig(wavelength="400nm").tx().wavelength == 400e-9
