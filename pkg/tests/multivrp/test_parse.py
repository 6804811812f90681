import pytest

from multivrp.models import BenchmarkFormat, ProblemType
from multivrp.parse import parse_benchmark, parse_cordeau, parse_li_lim, parse_solomon
from multivrp.validation import (
    BenchmarkParseError,
    BenchmarkValidationError,
    validate_instance,
)


def read_fixture(file_name: str) -> str:
    with open(f"tests/data/{file_name}", "r") as fixture:
        return fixture.read()


@pytest.mark.unit
class TestSolomon:
    def test_parse(self, solomon_text):
        instance = parse_solomon(solomon_text)
        assert instance.name == "C101_SMALL"
        assert instance.problem == ProblemType.CVRPTW
        assert instance.num_nodes == 3
        assert instance.num_agents == 3
        assert instance.capacity == 200
        assert instance.coords == [(40, 50), (45, 68), (45, 70)]
        assert instance.demand == [0, 10, 30]
        assert instance.tw_open == [0, 912, 825]
        assert instance.tw_close == [1236, 967, 870]
        assert instance.service_time == [0, 90, 90]
        assert instance.depot_close == [1236]
        assert validate_instance(instance).ok

    def test_bytes_input(self, solomon_text):
        assert parse_solomon(solomon_text.encode("utf-8")) == parse_solomon(
            solomon_text
        )

    def test_profit_from_demand_column(self, solomon_text):
        instance = parse_solomon(solomon_text, ProblemType.TOPTW)
        assert instance.profit == [0, 10, 30]
        assert instance.demand == [0, 0, 0]

        instance = parse_solomon(solomon_text, ProblemType.PCVRPTW)
        assert instance.profit == instance.demand == [0, 10, 30]

    def test_unsupported_variant(self, solomon_text):
        with pytest.raises(BenchmarkParseError):
            parse_solomon(solomon_text, ProblemType.PDPTW)

    @pytest.mark.parametrize(
        "file_name, error_class, code, line",
        [
            ("solomon_typo.txt", BenchmarkParseError, "PARSE_ERROR", 2),
            ("solomon_short_row.txt", BenchmarkParseError, "PARSE_ERROR", 11),
            (
                "solomon_negative_demand.txt",
                BenchmarkValidationError,
                "VALIDATION_ERROR",
                11,
            ),
        ],
    )
    def test_errors_carry_line(self, file_name, error_class, code, line):
        with pytest.raises(error_class) as error:
            parse_solomon(read_fixture(file_name))
        assert error.value.code == code
        assert error.value.line == line
        assert str(error.value).startswith(f"{code}: line {line}:")

    def test_not_utf8(self):
        with pytest.raises(BenchmarkParseError) as error:
            parse_solomon(b"\xff\xfe\x00")
        assert error.value.line == 1


@pytest.mark.unit
class TestLiLim:
    def test_parse(self):
        instance = parse_li_lim(read_fixture("li_lim_small.txt"), name="lc_small")
        assert instance.name == "lc_small"
        assert instance.problem == ProblemType.PDPTW
        assert instance.num_agents == 2
        assert instance.capacity == 100
        assert instance.pickup_of == [-1, -1, 1]
        assert instance.demand == [0, 10, 10]
        assert validate_instance(instance).ok

    def test_positive_delivery(self):
        with pytest.raises(BenchmarkValidationError) as error:
            parse_li_lim(read_fixture("li_lim_positive_delivery.txt"))
        assert error.value.line == 4

    def test_speed_is_ignored(self, caplog):
        lines = read_fixture("li_lim_small.txt").splitlines()
        text = "\n".join(["2 100 2"] + lines[1:])
        instance = parse_li_lim(text)
        assert instance.num_agents == 2
        assert "Ignoring vehicle speed" in caplog.text


@pytest.mark.unit
class TestCordeau:
    def test_multi_depot(self):
        instance = parse_cordeau(read_fixture("cordeau_small.txt"))
        assert instance.problem == ProblemType.MDVRPTW
        assert instance.num_nodes == 5
        assert instance.depot_indices == [3, 4]
        assert instance.num_agents == 2
        assert instance.agent_home_depot == [3, 4]
        assert instance.capacity == 100
        assert instance.demand == [10, 20, 15, 0, 0]
        assert instance.service_time == [5, 5, 5, 0, 0]
        assert instance.depot_close == [1000, 1000]
        assert validate_instance(instance).ok

    def test_duration_limit_closes_depot(self):
        instance = parse_cordeau(read_fixture("cordeau_duration.txt"))
        assert instance.problem == ProblemType.CVRPTW
        assert instance.num_agents == 2
        assert instance.agent_home_depot == [2, 2]
        assert instance.capacity == 50
        assert instance.depot_close == [200.0]

    def test_mixed_capacities(self):
        with pytest.raises(BenchmarkParseError) as error:
            parse_cordeau(read_fixture("cordeau_mixed_capacity.txt"))
        assert error.value.code == "PARSE_ERROR"

    def test_unsupported_type(self):
        text = read_fixture("cordeau_small.txt").replace("6 1 3 2", "2 1 3 2", 1)
        with pytest.raises(BenchmarkParseError) as error:
            parse_cordeau(text)
        assert error.value.line == 1


@pytest.mark.unit
class TestParseBenchmark:
    def test_dispatch(self, solomon_text):
        instance = parse_benchmark(BenchmarkFormat.SOLOMON, solomon_text)
        assert instance == parse_solomon(solomon_text)

    def test_string_format(self):
        instance = parse_benchmark("cordeau", read_fixture("cordeau_small.txt"))
        assert instance.name == "cordeau"

    def test_name_override(self, solomon_text):
        instance = parse_benchmark(BenchmarkFormat.SOLOMON, solomon_text, name="c101")
        assert instance.name == "c101"

    def test_problem_override(self, solomon_text):
        instance = parse_benchmark(
            BenchmarkFormat.SOLOMON, solomon_text, problem=ProblemType.SDVRPTW
        )
        assert instance.problem == ProblemType.SDVRPTW
