"""
This module handles everything related to parsing OR benchmark files into
InstanceData models.

Coordinates and times are kept in the file's native units.
"""
import logging
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from multivrp.models import BenchmarkFormat, InstanceData, ProblemType
from multivrp.validation import BenchmarkParseError, BenchmarkValidationError

logger = logging.getLogger(__name__)

SOLOMON_ROW_FIELDS = 7
LI_LIM_ROW_FIELDS = 9
CORDEAU_VRPTW = 4
CORDEAU_MDVRPTW = 6

Row = Tuple[int, List[str]]


class _TokenLines:
    """Non-blank lines of a file, split on whitespace, with 1-based line numbers."""

    def __init__(self, text: Union[str, bytes]) -> None:
        if isinstance(text, bytes):
            try:
                text = text.decode("utf-8")
            except UnicodeDecodeError as error:
                raise BenchmarkParseError("file is not valid UTF-8.", 1) from error
        raw_lines = text.splitlines()
        self.rows: List[Row] = [
            (number, line.split())
            for number, line in enumerate(raw_lines, start=1)
            if line.strip()
        ]
        self.end_line = len(raw_lines) + 1
        self.position = 0

    def next(self, expected: str) -> Row:
        """The next non-blank line, or a PARSE_ERROR naming what was expected."""
        if self.position >= len(self.rows):
            raise BenchmarkParseError(
                f"unexpected end of file, expected {expected}.", self.end_line
            )
        row = self.rows[self.position]
        self.position += 1
        return row

    def remaining(self) -> Iterator[Row]:
        """Every line not consumed yet."""
        while self.position < len(self.rows):
            yield self.next("a row")


def _number(token: str, line: int, cast: Callable = float) -> float:
    try:
        return cast(token)
    except ValueError as error:
        raise BenchmarkParseError(f"'{token}' is not a number.", line) from error


def _expect_keyword(row: Row, keywords: Sequence[str]) -> None:
    line, tokens = row
    found = [token.upper() for token in tokens]
    if found[: len(keywords)] != list(keywords):
        raise BenchmarkParseError(
            f"expected '{' '.join(keywords)}', found '{' '.join(tokens)}'.", line
        )


def _non_negative(value: float, field_name: str, line: int) -> float:
    if value < 0:
        raise BenchmarkValidationError(f"negative {field_name} ({value}).", line)
    return value


def _check_window(ready: float, due: float, line: int) -> None:
    _non_negative(ready, "ready time", line)
    _non_negative(due, "due date", line)


def _parse_solomon_rows(lines: _TokenLines, num_fields: int) -> List[Row]:
    rows = []
    for line, tokens in lines.remaining():
        if len(tokens) != num_fields:
            raise BenchmarkParseError(
                f"expected {num_fields} fields, found {len(tokens)}.", line
            )
        node_id = _number(tokens[0], line, int)
        if node_id != len(rows):
            raise BenchmarkParseError(
                f"expected customer {len(rows)}, found {node_id}.", line
            )
        rows.append((line, tokens))
    if not rows:
        raise BenchmarkParseError("no customer rows.", lines.end_line)
    return rows


def _node_fields(rows: List[Row]) -> Dict[str, List[float]]:
    """Columns shared by the Solomon and Li & Lim row layouts."""
    fields: Dict[str, List[float]] = {
        "x": [],
        "y": [],
        "demand": [],
        "ready": [],
        "due": [],
        "service": [],
    }
    for line, tokens in rows:
        values = [_number(token, line) for token in tokens[1:SOLOMON_ROW_FIELDS]]
        for key, value in zip(fields, values):
            fields[key].append(value)
        _check_window(fields["ready"][-1], fields["due"][-1], line)
        _non_negative(fields["service"][-1], "service time", line)
    return fields


def _build_single_depot(
    name: str,
    problem: ProblemType,
    num_agents: int,
    capacity: float,
    fields: Dict[str, List[float]],
    demand: List[float],
    profit: List[float],
    pickup_of: List[int],
) -> InstanceData:
    num_nodes = len(fields["x"])
    return InstanceData(
        name=name,
        problem=problem,
        num_nodes=num_nodes,
        num_agents=num_agents,
        coords=list(zip(fields["x"], fields["y"])),
        is_depot=[True] + [False] * (num_nodes - 1),
        demand=demand,
        profit=profit,
        service_time=[0.0] + fields["service"][1:],
        tw_open=fields["ready"],
        tw_close=fields["due"],
        capacity=capacity,
        depot_open=[fields["ready"][0]],
        depot_close=[fields["due"][0]],
        agent_home_depot=[0] * num_agents,
        pickup_of=pickup_of,
    )


SOLOMON_PROBLEMS = (
    ProblemType.CVRPTW,
    ProblemType.SDVRPTW,
    ProblemType.TOPTW,
    ProblemType.PCVRPTW,
)


def parse_solomon(
    text: Union[str, bytes], problem: ProblemType = ProblemType.CVRPTW
) -> InstanceData:
    """
    Parse a Solomon VRPTW file.

    The profit problems read their profits from the demand column; TOPTW then
    drops the demands.
    """
    problem = ProblemType(problem)
    if problem not in SOLOMON_PROBLEMS:
        raise BenchmarkParseError(
            f"Solomon files can not describe a {problem.value} instance.", 1
        )
    lines = _TokenLines(text)
    line, tokens = lines.next("the instance name")
    if len(tokens) != 1:
        raise BenchmarkParseError("the first line must be the instance name.", line)
    name = tokens[0]
    _expect_keyword(lines.next("VEHICLE"), ["VEHICLE"])
    _expect_keyword(lines.next("the vehicle header"), ["NUMBER", "CAPACITY"])
    line, tokens = lines.next("the vehicle number and capacity")
    if len(tokens) < 2:
        raise BenchmarkParseError("expected the vehicle number and capacity.", line)
    num_agents = int(_number(tokens[0], line, int))
    capacity = _number(tokens[1], line)
    if num_agents <= 0 or capacity <= 0:
        raise BenchmarkValidationError(
            "the vehicle number and capacity must be positive.", line
        )
    _expect_keyword(lines.next("CUSTOMER"), ["CUSTOMER"])
    _expect_keyword(lines.next("the customer header"), ["CUST"])

    rows = _parse_solomon_rows(lines, SOLOMON_ROW_FIELDS)
    fields = _node_fields(rows)
    for (line, _), demand in zip(rows, fields["demand"]):
        _non_negative(demand, "demand", line)

    demand = [0.0] + fields["demand"][1:]
    profit = [0.0] * len(demand)
    if problem.collects_profit:
        profit = list(demand)
    if not problem.uses_capacity:
        demand = [0.0] * len(demand)
    return _build_single_depot(
        name, problem, num_agents, capacity, fields, demand, profit, [-1] * len(demand)
    )


def parse_li_lim(text: Union[str, bytes], name: str = "li_lim") -> InstanceData:
    """
    Parse a Li & Lim PDPTW file.

    Delivery rows carry negative demands in the file; both halves of a pair
    are stored with the positive transported quantity.
    """
    lines = _TokenLines(text)
    line, tokens = lines.next("the vehicle number, capacity and speed")
    if len(tokens) != 3:
        raise BenchmarkParseError(
            "the first line must hold the vehicle number, capacity and speed.", line
        )
    num_agents = int(_number(tokens[0], line, int))
    capacity = _number(tokens[1], line)
    speed = _number(tokens[2], line)
    if num_agents <= 0 or capacity <= 0 or speed <= 0:
        raise BenchmarkValidationError(
            "the vehicle number, capacity and speed must be positive.", line
        )
    if speed != 1:
        logger.warning("Ignoring vehicle speed %s, unit speed is assumed.", speed)

    rows = _parse_solomon_rows(lines, LI_LIM_ROW_FIELDS)
    fields = _node_fields(rows)
    demand = [0.0]
    pickup_of = [-1]
    for line, tokens in rows[1:]:
        node_demand = _number(tokens[3], line)
        pickup = int(_number(tokens[7], line, int))
        delivery = int(_number(tokens[8], line, int))
        if not 0 <= pickup < len(rows) or not 0 <= delivery < len(rows):
            raise BenchmarkParseError("pairing index out of range.", line)
        if pickup > 0:
            if node_demand > 0:
                raise BenchmarkValidationError(
                    f"delivery demand must not be positive ({node_demand}).", line
                )
            demand.append(-node_demand)
            pickup_of.append(pickup)
        else:
            demand.append(_non_negative(node_demand, "demand", line))
            pickup_of.append(-1)

    return _build_single_depot(
        name,
        ProblemType.PDPTW,
        num_agents,
        capacity,
        fields,
        demand,
        [0.0] * len(demand),
        pickup_of,
    )


def _parse_cordeau_row(row: Row, num_nodes: int) -> Dict[str, float]:
    line, tokens = row
    if len(tokens) < 9:
        raise BenchmarkParseError(
            f"expected at least 9 fields, found {len(tokens)}.", line
        )
    combinations = int(_number(tokens[6], line, int))
    if len(tokens) != 9 + combinations:
        raise BenchmarkParseError(
            f"expected {9 + combinations} fields, found {len(tokens)}.", line
        )
    node_id = int(_number(tokens[0], line, int))
    if node_id != num_nodes + 1:
        raise BenchmarkParseError(
            f"expected node {num_nodes + 1}, found {node_id}.", line
        )
    values = {
        "x": _number(tokens[1], line),
        "y": _number(tokens[2], line),
        "service": _non_negative(_number(tokens[3], line), "service time", line),
        "demand": _non_negative(_number(tokens[4], line), "demand", line),
        "ready": _number(tokens[-2], line),
        "due": _number(tokens[-1], line),
    }
    _check_window(values["ready"], values["due"], line)
    return values


def parse_cordeau(text: Union[str, bytes], name: str = "cordeau") -> InstanceData:
    """
    Parse a Cordeau VRPTW (type 4) or MDVRPTW (type 6) file.

    Node order follows the file, so the depots close the node list. A
    maximum route duration D > 0 tightens each depot's closing time to
    min(l, e + D).
    """
    lines = _TokenLines(text)
    line, tokens = lines.next("the problem header")
    if len(tokens) != 4:
        raise BenchmarkParseError(
            "the first line must hold type, vehicles, customers and depots.", line
        )
    kind, vehicles, customers, depots = (
        int(_number(token, line, int)) for token in tokens
    )
    if kind not in (CORDEAU_VRPTW, CORDEAU_MDVRPTW):
        raise BenchmarkParseError(f"unsupported problem type {kind}.", line)
    if vehicles <= 0 or customers <= 0 or depots <= 0:
        raise BenchmarkValidationError("counts must be positive.", line)
    if kind == CORDEAU_VRPTW and depots != 1:
        raise BenchmarkParseError("a type 4 file has a single depot.", line)

    limits = []
    for _ in range(depots):
        line, tokens = lines.next("a depot duration and load line")
        if len(tokens) != 2:
            raise BenchmarkParseError("expected the maximum duration and load.", line)
        limits.append((_number(tokens[0], line), _number(tokens[1], line)))
    capacities = {load for _, load in limits}
    if len(capacities) != 1:
        raise BenchmarkParseError("depot capacities differ.", line)
    capacity = capacities.pop()
    if capacity <= 0:
        raise BenchmarkValidationError("the capacity must be positive.", line)

    nodes = [
        _parse_cordeau_row(lines.next("a node row"), num_nodes)
        for num_nodes in range(customers + depots)
    ]
    extra = next(lines.remaining(), None)
    if extra is not None:
        raise BenchmarkParseError("unexpected rows after the depots.", extra[0])

    depot_nodes = list(range(customers, customers + depots))
    depot_close = []
    for (duration, _), node in zip(limits, depot_nodes):
        close = nodes[node]["due"]
        if duration > 0:
            close = min(close, nodes[node]["ready"] + duration)
        depot_close.append(close)

    num_nodes = customers + depots
    is_depot = [False] * customers + [True] * depots
    return InstanceData(
        name=name,
        problem=ProblemType.MDVRPTW
        if kind == CORDEAU_MDVRPTW
        else ProblemType.CVRPTW,
        num_nodes=num_nodes,
        num_agents=vehicles * depots,
        coords=[(node["x"], node["y"]) for node in nodes],
        is_depot=is_depot,
        demand=[0.0 if flag else node["demand"] for node, flag in zip(nodes, is_depot)],
        profit=[0.0] * num_nodes,
        service_time=[
            0.0 if flag else node["service"] for node, flag in zip(nodes, is_depot)
        ],
        tw_open=[node["ready"] for node in nodes],
        tw_close=[node["due"] for node in nodes],
        capacity=capacity,
        depot_open=[nodes[node]["ready"] for node in depot_nodes],
        depot_close=depot_close,
        agent_home_depot=[
            depot_nodes[agent // vehicles] for agent in range(vehicles * depots)
        ],
        pickup_of=[-1] * num_nodes,
    )


def parse_benchmark(
    benchmark_format: BenchmarkFormat,
    text: Union[str, bytes],
    name: Optional[str] = None,
    problem: Optional[ProblemType] = None,
) -> InstanceData:
    """
    Parse a benchmark file of the given format.

    `problem` selects the variant read from a Solomon file, the other
    formats fix their own.

    Grammar errors raise a PARSE_ERROR, invalid values a VALIDATION_ERROR,
    both carrying the offending line number.
    """
    benchmark_format = BenchmarkFormat(benchmark_format)
    if benchmark_format == BenchmarkFormat.SOLOMON:
        instance = parse_solomon(text, problem or ProblemType.CVRPTW)
    elif benchmark_format == BenchmarkFormat.LI_LIM:
        instance = parse_li_lim(text, name or "li_lim")
    else:
        instance = parse_cordeau(text, name or "cordeau")
    if name and instance.name != name:
        instance = InstanceData(**{**instance.dict(), "name": name})
    logger.debug(
        "Parsed %s file into '%s' with %d nodes.",
        benchmark_format.value,
        instance.name,
        instance.num_nodes,
    )
    return instance
