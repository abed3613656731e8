import re
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lolamon.fence import generate_faces_spec, scaling_faces
from lolamon.frontend import ParseError, format_expr, format_spec, parse_expression, parse_spec
from lolamon.frontend import ast
from lolamon.frontend.lexer import KEYWORDS
from lolamon.types import SemType

HEIGHT = """\
input height: Float32
output avg_height @1Hz := height.aggregate(over: 2min, using: avg)
output δheight := abs(avg_height.hold().defaults(to: height) - height)
trigger δheight > 50.0 "WARNING: Suspicious jump in height."
"""

CORPUS = ["height", "gps_imu", "validation", "geofence", "cross_validation"]


def corpus(name: str) -> str:
    return resources.files("lolamon.corpus").joinpath(f"{name}.lola").read_text(encoding="utf-8")


def test_height_spec_shape():
    spec = parse_spec(HEIGHT)
    assert [d.name for d in spec.inputs] == ["height"]
    assert [d.name for d in spec.outputs] == ["avg_height", "δheight"]
    assert spec.outputs[0].frequency.hz == 1
    assert spec.outputs[1].frequency is None
    assert spec.triggers[0].message == "WARNING: Suspicious jump in height."
    window = spec.outputs[0].expr
    assert isinstance(window, ast.Window)
    assert window.duration.seconds == 120
    assert window.function is ast.WindowFunction.AVG


@pytest.mark.parametrize("source", ["", "   \n", "// only a comment\n", "import math\n"])
def test_empty_sources(source):
    spec = parse_spec(source)
    assert spec.declaration_count == 0
    assert format_spec(spec) == ""


def test_single_face_template_counts():
    spec = parse_spec(generate_faces_spec(scaling_faces(1)))
    assert (len(spec.inputs), len(spec.outputs), len(spec.triggers)) == (2, 16, 1)


def test_trigger_renders_on_one_line():
    spec = parse_spec('input speed_h: Float16\ntrigger abs(speed_h) > 1.5 "VIOLATION: Horizontal speed exceeds threshold."')
    text = format_spec(spec)
    assert text.splitlines()[1] == 'trigger abs(speed_h) > 1.5 "VIOLATION: Horizontal speed exceeds threshold."'


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip(name):
    spec = parse_spec(corpus(name))
    text = format_spec(spec)
    assert parse_spec(text) == spec
    assert format_spec(parse_spec(text)) == text


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_literal_text_preserved(name):
    spec = parse_spec(corpus(name))
    literals = set()
    for decl in spec.outputs + spec.triggers:
        literals |= {n.text for n in ast.walk(decl.expr) if isinstance(n, ast.Literal)}
    rendered = format_spec(spec)
    for text in literals:
        assert re.search(r"(?<![\w.])" + re.escape(text) + r"(?![\w.])", rendered), text


@pytest.mark.parametrize(
    "unicode_src, ascii_src",
    [
        ("a ∧ b", "a and b"),
        ("a ∨ ¬b", "a || !b"),
        ("x ≠ 1", "x != 1"),
        ("x ≤ 1 ∧ x ≥ 0", "x <= 1 && x >= 0"),
        ("x = 1", "x == 1"),
        ("x.aggregate(over: ∞, using: Σ)", "x.aggregate(over: infinity, using: sum)"),
        ("x.aggregate(over: 3s, using: ∫)", "x.aggregate(over: 3s, using: integral)"),
    ],
)
def test_unicode_aliases(unicode_src, ascii_src):
    assert parse_expression(unicode_src) == parse_expression(ascii_src)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("1 + 2 * 3", "1 + 2 * 3"),
        ("(1 + 2) * 3", "(1 + 2) * 3"),
        ("a - (b - c)", "a - (b - c)"),
        ("a - b - c", "a - b - c"),
        ("!(a and b)", "!(a and b)"),
        ("a or b and c", "a or b and c"),
        ("(a or b) and c", "(a or b) and c"),
        ("x + 1 > 2 and y", "x + 1 > 2 and y"),
        ("-x * 2", "-x * 2"),
        ("if a then 1 else 2", "if a then 1 else 2"),
    ],
)
def test_precedence_and_canonical_text(text, expected):
    assert format_expr(parse_expression(text)) == expected


@pytest.mark.parametrize(
    "source, fragment",
    [
        ("input x: Int8\ninput x: Int8", "duplicate"),
        ("input x: Int8\noutput x := 1", "duplicate"),
        ("input x: Int8\noutput a := x.offset(by: 1).defaults(to: 0)", "negative"),
        ("input x: Int8\noutput a := x.offset(by: 0).defaults(to: 0)", "negative"),
        ("input x: Int8\noutput a := x.offset(by: -1)", ""),
        ("input x: Int8\noutput a := x.hold()", ""),
        ("input x: Foo", ""),
        ("input x: Int8\noutput a := frob(x)", ""),
        ("input x: Int8\noutput a := x < 1 < 2", ""),
        ("input x: Int8\noutput a @0Hz := x", ""),
        ("input x: Int8\ntrigger x > 1", ""),
        ('trigger true "unterminated', ""),
    ],
)
def test_parse_errors(source, fragment):
    with pytest.raises(ParseError) as info:
        parse_spec(source)
    assert fragment in str(info.value)
    assert info.value.line >= 1


def test_error_location_points_at_token():
    with pytest.raises(ParseError) as info:
        parse_spec("input x: Int8\noutput a := x +\n")
    assert info.value.line in (2, 3)


def test_locations_kept_but_ignored_by_equality():
    a = parse_spec("input x: Int8\noutput y := x + 1")
    b = parse_spec("\n\ninput   x: Int8\n\n   output y :=   x+1")
    assert a == b
    assert a.outputs[0].loc.line == 2
    assert b.outputs[0].loc.line == 5


# -- generated ASTs -----------------------------------------------------------------

RESERVED = set(KEYWORDS) | set(ast.FUNCTIONS) | {"and", "or", "infinity", "Hz"}
names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(lambda s: s not in RESERVED)

int_literals = st.integers(0, 10**6).map(lambda n: ast.Literal(n, str(n)))
float_literals = st.tuples(st.integers(0, 9999), st.integers(0, 999)).map(
    lambda p: ast.Literal(float(f"{p[0]}.{p[1]}"), f"{p[0]}.{p[1]}")
)
bool_literals = st.booleans().map(lambda b: ast.Literal(b, "true" if b else "false"))
literals = st.one_of(int_literals, float_literals, bool_literals)

durations = st.one_of(
    st.none(),
    st.tuples(st.integers(1, 600), st.sampled_from(["s", "min", "h"])).map(
        lambda p: ast.Duration(str(p[0]), p[1])
    ),
)


def _extend(children):
    return st.one_of(
        st.builds(ast.Unary, st.sampled_from(["-", "!"]), children),
        st.builds(ast.Binary, st.sampled_from(ast.BINARY_OPS), children, children),
        st.builds(ast.If, children, children, children),
        st.builds(ast.Call, st.sampled_from(["abs", "sqrt", "cast", "Int", "Float", "UInt8", "Float32"]), children),
        st.builds(ast.Offset, names, st.integers(-5, -1), children),
        st.builds(ast.Hold, names, children),
        st.builds(
            ast.Default,
            st.builds(ast.Window, names, durations, st.sampled_from(list(ast.WindowFunction))),
            children,
        ),
    )


leaves = st.one_of(
    literals,
    names.map(ast.StreamRef),
    st.builds(ast.Window, names, durations, st.sampled_from(list(ast.WindowFunction))),
)
expressions = st.recursive(leaves, _extend, max_leaves=12)
frequencies = st.one_of(st.none(), st.sampled_from(["1", "2", "10", "0.5", "100"]).map(ast.Frequency))
messages = st.text(st.characters(blacklist_categories=("Cs", "Cc")), max_size=20)


@st.composite
def specifications(draw):
    decl_names = draw(st.lists(names, min_size=0, max_size=6, unique=True))
    split = draw(st.integers(0, len(decl_names)))
    inputs = [ast.InputDecl(n, draw(st.sampled_from(list(SemType)))) for n in decl_names[:split]]
    outputs = [
        ast.OutputDecl(
            n,
            draw(st.one_of(st.none(), st.sampled_from(list(SemType)))),
            draw(frequencies),
            draw(expressions),
        )
        for n in decl_names[split:]
    ]
    triggers = draw(
        st.lists(st.builds(ast.TriggerDecl, frequencies, expressions, messages), max_size=3)
    )
    return ast.SpecificationAst(inputs, outputs, triggers)


@settings(max_examples=300, deadline=None)
@given(expressions)
def test_expression_round_trip(expr):
    assert parse_expression(format_expr(expr)) == expr


@settings(max_examples=150, deadline=None)
@given(specifications())
def test_spec_round_trip(spec):
    text = format_spec(spec)
    assert parse_spec(text) == spec


TOKENS = [
    "input", "output", "trigger", "x", "y", ":", ":=", "Int8", "Float32", "@1Hz", "(", ")",
    "+", "-", "*", "/", "<", "∧", "¬", "if", "then", "else", "1", "2.5", '"m"', ".offset(by: -1)",
    ".defaults(to: 0)", ".hold()", ".aggregate(over: 3s, using: Σ)", "\n", "//c\n", "∞", "§",
]


@settings(max_examples=400, deadline=None)
@given(st.one_of(st.text(max_size=60), st.lists(st.sampled_from(TOKENS), max_size=25).map(" ".join)))
def test_parsing_is_total(source):
    try:
        parse_spec(source)
    except ParseError:
        pass
