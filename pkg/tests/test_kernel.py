import pytest

from sralloc import (
    KERNEL_NAMES,
    KernelError,
    KernelSyntaxError,
    KernelValidationError,
    bundled_kernels,
    iteration_space_size,
    kernel_to_source,
    parse_kernel,
)

FIG_SOURCE = """\
# worked example nest
param BI = 100;
param BJ = 20;
param BK = 30;
loop i = 0..BI {
  loop j = 0..BJ {
    loop k = 0..BK {
      S1: d[i][k] = a[k] * b[k][j];
      S2: e[i][j][k] = c[j] * d[i][k];
    }
  }
}
"""


def test_parse_example_nest():
    k = parse_kernel(FIG_SOURCE, name="example")
    assert [lp.index for lp in k.loops] == ["i", "j", "k"]
    assert [lp.trip for lp in k.loops] == [100, 20, 30]
    assert len(k.statements) == 2
    assert len(k.refs) == 6  # write d, reads a/b, write e, reads c/d
    assert k.arrays == ("d", "a", "b", "e", "c")
    assert k.statements[0].op == "multiply"
    # every static ref id appears exactly once
    ids = [r.ref_id for r in k.refs]
    assert ids == sorted(set(ids))


def test_parse_minimal_copy_kernel():
    k = parse_kernel("loop i = 0..1 { S: y[i] = x[i]; }")
    assert k.depth == 1
    assert k.loops[0].trip == 1
    assert len(k.statements) == 1
    assert k.statements[0].op == "copy"


def test_nonaffine_subscript_rejected():
    src = "loop i = 0..4 { loop j = 0..4 { S: y[i][j] = a[i*j]; } }"
    with pytest.raises(KernelSyntaxError, match="non-affine"):
        parse_kernel(src)


def test_affine_subscripts_with_params_and_coefficients():
    src = """\
param N = 8;
loop i = 0..4 {
  loop j = 0..4 {
    S: y[2*i + j - 1][N] = a[N*i + j];
  }
}
"""
    k = parse_kernel(src)
    write = k.statements[0].write
    assert write.subscripts[0].eval({"i": 3, "j": 2}) == 7
    assert write.subscripts[1].const == 8
    read = k.statements[0].reads[0]
    assert read.subscripts[0].eval({"i": 1, "j": 1}) == 9


def test_accumulate_adds_implicit_read():
    k = parse_kernel("loop i = 0..3 { loop j = 0..3 { S: y[i] += a[j] * b[i + j]; } }")
    stmt = k.statements[0]
    assert stmt.accumulate
    implicit = [r for r in stmt.reads if r.implicit]
    assert len(implicit) == 1
    assert implicit[0].array == "y"
    assert implicit[0].subscripts == stmt.write.subscripts


@pytest.mark.parametrize("src,match", [
    ("loop i = 0..4 { loop j = 0..4 { S: y[i] = x[j]; } S2: z[i] = x[i]; }", "imperfect"),
    ("loop i = 0..4 { }", "no statements"),
    ("loop i = 0..4 { S: y[i] = x[q]; }", "undefined identifier"),
    ("loop i = 0..4 { loop j = 0..i { S: y[i] = x[j]; } }", "non-constant bound"),
    ("loop i = 0..4 { loop i = 0..2 { S: y[i] = x[i]; } }", "duplicate"),
    ("loop i = 4..4 { S: y[i] = x[i]; }", "empty loop"),
    ("loop i = 0..4 { S: y[i] = x[i][i]; T: z[i] = x[i]; }", "subscripts"),
    ("param N = 2;\nparam N = 3;\nloop i = 0..4 { S: y[i] = x[i]; }", "duplicate param"),
])
def test_validation_errors(src, match):
    with pytest.raises(KernelError, match=match):
        parse_kernel(src)


def test_syntax_error_carries_position():
    with pytest.raises(KernelSyntaxError, match=r"line 2"):
        parse_kernel("loop i = 0..4 {\n  S: y[i] = ;\n}")


def test_two_sibling_loops_rejected():
    src = """\
loop i = 0..4 {
  loop j = 0..4 { S: y[i][j] = x[j][i]; }
  loop k = 0..4 { T: z[i][k] = x[k][i]; }
}
"""
    with pytest.raises(KernelValidationError, match="sibling"):
        parse_kernel(src)


def test_step_loops():
    k = parse_kernel("loop i = 0..10 step 2 { S: y[i] = x[i]; }")
    assert k.loops[0].trip == 5
    assert list(k.loops[0].range) == [0, 2, 4, 6, 8]


def test_iteration_space_size_levels(example):
    assert iteration_space_size(example, 0) == 60000
    assert iteration_space_size(example, 1) == 600
    assert iteration_space_size(example, example.depth) == 1
    with pytest.raises(KernelError):
        iteration_space_size(example, 9)


def test_iteration_space_size_single_trip():
    k = parse_kernel("loop i = 0..1 { S: y[i] = x[i]; }")
    assert iteration_space_size(k, 0) == 1
    assert iteration_space_size(k, 1) == 1


def test_bundled_corpus_shapes():
    ks = bundled_kernels()
    assert set(ks) == set(KERNEL_NAMES)
    assert len(ks) == 7
    assert ks["example"].depth == 3
    assert ks["fir"].depth == 2
    assert ks["dec-fir"].depth == 2
    assert ks["imi"].depth == 2
    assert ks["pat"].depth == 2
    assert ks["mat"].depth == 3
    assert ks["bic"].depth == 4
    assert ks["fir"].arrays == ("out", "coeff", "in")
    assert ks["mat"].arrays == ("c", "a", "b")


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_parse_print_round_trip(name):
    k = bundled_kernels()[name]
    again = parse_kernel(kernel_to_source(k), name=k.name)
    assert again == k


def test_read_write_classification_is_exclusive(example):
    for r in example.refs:
        assert r.access in ("read", "write")
    writes = [r.ref_id for r in example.refs if r.access == "write"]
    reads = [r.ref_id for r in example.refs if r.access == "read"]
    assert not set(writes) & set(reads)
