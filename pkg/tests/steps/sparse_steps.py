"""Step definitions for hybrid sparse codec scenarios."""

from __future__ import annotations

import json

import numpy as np
from behave import given, when, then

from scene import GeneratorSettings, generate_synthetic_scene
from sparse import (
    QueryOutOfBoundsError,
    SizeModel,
    Variant,
    bitmap_size,
    coo_size,
    decode,
    dense_codec_stats,
    dump_encoding,
    encode,
    load_encoding,
    profile_queries,
    query,
    query_many,
    search_path,
    sparsity_census,
)
from tests.helpers.assertions import (
    AssertionError,
    assert_arrays_identical,
    assert_at_least,
    assert_at_most,
    assert_close,
    assert_equal,
    assert_matches_schema,
)
from tests.helpers.fixtures import cached_scene, sparse_matrix


@given("a {rows:d}x{cols:d} matrix with {zeros:d} zeros")
def step_matrix_with_zeros(context, rows: int, cols: int, zeros: int):
    """Random matrix with an exact zero count."""
    context.matrix = sparse_matrix(np.random.default_rng(rows * cols + zeros), rows, cols, zeros)


@given("an all-zero {rows:d}x{cols:d} matrix")
def step_zero_matrix(context, rows: int, cols: int):
    context.matrix = np.zeros((rows, cols), dtype=np.float32)


@given("a {rows:d}x{cols:d} matrix with {nnz:d} non-zeros on distinct rows and columns including ({x:d}, {y:d})")
def step_distinct_matrix(context, rows: int, cols: int, nnz: int, x: int, y: int):
    """Scatter non-zeros so no two share a row or a column."""
    rng = np.random.default_rng(17)
    xs = np.concatenate([[x], rng.permutation(np.setdiff1d(np.arange(rows), [x]))[: nnz - 1]])
    ys = np.concatenate([[y], rng.permutation(np.setdiff1d(np.arange(cols), [y]))[: nnz - 1]])
    matrix = np.zeros((rows, cols), dtype=np.float32)
    matrix[xs, ys] = rng.uniform(0.5, 2.0, size=nnz).astype(np.float32)
    context.matrix = matrix


@given("a {rows:d}x{cols:d} matrix with {nnz:d} non-zeros all in row {row:d}")
def step_single_row_matrix(context, rows: int, cols: int, nnz: int, row: int):
    rng = np.random.default_rng(rows + nnz)
    matrix = np.zeros((rows, cols), dtype=np.float32)
    matrix[row, rng.permutation(cols)[:nnz]] = rng.uniform(0.5, 2.0, size=nnz).astype(np.float32)
    context.matrix = matrix


@when("I encode it with the hybrid codec")
def step_encode(context):
    """Encode under the sparsity policy."""
    context.encoding = encode(context.matrix)


@when("I encode it forcing the {variant} variant")
def step_encode_forced(context, variant: str):
    """Encode with a fixed format."""
    context.encoding = encode(context.matrix, force_variant=Variant(variant))


@then("the {variant} variant is chosen")
def step_check_variant(context, variant: str):
    """Verify the policy decision."""
    assert_equal(context.encoding.variant, Variant(variant), "variant")


@then("the encoding decodes to the original matrix")
def step_check_decode(context):
    """Verify losslessness."""
    assert_arrays_identical(decode(context.encoding), context.matrix, "decoded matrix")


@then("the encoded size is {size:d} bytes")
def step_check_size(context, size: int):
    assert_equal(context.encoding.encoded_bytes, size, "encoded bytes")


@then("the COO size is {nnz:d} entries of 8 bytes plus 3 bytes per tree node")
def step_check_coo_size(context, nnz: int):
    """Verify the COO size formula."""
    payload = context.encoding.payload
    assert_equal(payload.nnz, nnz, "non-zeros")
    assert_equal(context.encoding.encoded_bytes, nnz * 8 + 3 * payload.num_nodes, "encoded bytes")
    assert_equal(payload.num_nodes, 2**payload.height - 1, "node count")


@then("the search tree has height at least {height:d}")
def step_check_min_height(context, height: int):
    assert_at_least(context.encoding.payload.height, height, "tree height")


@then("the search tree has height {height:d}")
def step_check_height(context, height: int):
    assert_equal(context.encoding.payload.height, height, "tree height")


@then("the tree splits on x at even depths and on y at odd depths")
def step_check_alternating_axes(context):
    """Verify each node splits on the axis its depth selects."""
    for slot, node in enumerate(context.encoding.payload.nodes):
        depth = (slot + 1).bit_length() - 1
        assert_equal(node.axis, depth % 2, f"axis of tree node {slot}")


@then("every leaf holds at most {capacity:d} entries")
def step_check_leaf_capacity(context, capacity: int):
    for j, bucket in enumerate(context.encoding.payload.leaves):
        assert_at_most(int(bucket.shape[0]), capacity, f"entries in leaf {j}")


@then("querying ({x:d}, {y:d}) walks {labels:d} comparisons and costs {cycles:d} cycles")
def step_check_coo_query(context, x: int, y: int, labels: int, cycles: int):
    """Verify the COO lookup path and latency."""
    path, _ = search_path(context.encoding.payload, x, y)
    assert_equal(len(path), labels, "comparisons")
    result = query(context.encoding, x, y)
    assert_equal(result.cycles, cycles, "query cycles")
    assert_equal(result.value, float(context.matrix[x, y]), "query value")


@then("querying any element returns 0 in {cycles:d} cycle")
def step_check_empty_query(context, cycles: int):
    """Verify lookups into an empty encoding."""
    result = query(context.encoding, 3, 5)
    assert_equal(result.value, 0.0, "value")
    assert_equal(result.cycles, cycles, "cycles")


@then("zero elements cost 1 cycle and non-zeros cost 3 cycles")
def step_check_bitmap_cycles(context):
    """Verify bitmap latencies on every element."""
    rows, cols = context.matrix.shape
    xs, ys = np.divmod(np.arange(rows * cols), cols)
    values, cycles = query_many(context.encoding, xs, ys)
    expected = np.where(context.matrix.reshape(-1) != 0, 3, 1)
    assert_arrays_identical(cycles, expected, "cycles")
    assert_arrays_identical(values, context.matrix.reshape(-1).astype(np.float64), "values")


@then("a query outside the matrix is rejected")
def step_check_out_of_bounds(context):
    rows, cols = context.matrix.shape
    for x, y in ((rows, 0), (0, cols), (-1, 0)):
        try:
            query(context.encoding, x, y)
        except QueryOutOfBoundsError:
            continue
        raise AssertionError(f"Query ({x}, {y}) was accepted")


@then("the encoding survives a JSON dump and reload")
def step_check_dump(context):
    """Verify the encoding dump format."""
    data = json.loads(json.dumps(dump_encoding(context.encoding)))
    assert_matches_schema(data, "encoding_dump")
    reloaded = load_encoding(data)
    assert_equal(reloaded.variant, context.encoding.variant, "variant")
    assert_equal(reloaded.encoded_bytes, context.encoding.encoded_bytes, "encoded bytes")
    assert_arrays_identical(decode(reloaded), context.matrix, "reloaded matrix")


@when("I encode the configured number of random matrices")
def step_encode_random(context):
    """Encode matrices of random shape and sparsity, keeping mismatches."""
    rng = np.random.default_rng(context.config.scene_seed)
    context.random_failures = []
    context.variants = set()
    for i in range(context.config.random_matrices):
        rows, cols = (int(n) for n in rng.integers(1, 48, size=2))
        zeros = int(rng.integers(0, rows * cols + 1))
        matrix = sparse_matrix(rng, rows, cols, zeros)
        enc = encode(matrix)
        context.variants.add(enc.variant)
        if not np.array_equal(decode(enc), matrix):
            context.random_failures.append(f"matrix {i}: decode mismatch")
            continue
        xs, ys = np.divmod(np.arange(rows * cols), cols)
        values, cycles = query_many(enc, xs, ys)
        if not np.array_equal(values, matrix.reshape(-1).astype(np.float64)):
            context.random_failures.append(f"matrix {i}: query mismatch")
        if enc.variant is Variant.COO:
            if not np.all(cycles == enc.payload.height + 1):
                context.random_failures.append(f"matrix {i}: COO latency is not height + 1")
            if any(leaf.shape[0] > 16 for leaf in enc.payload.leaves):
                context.random_failures.append(f"matrix {i}: leaf over capacity")
        elif not set(np.unique(cycles).tolist()) <= {1, 3}:
            context.random_failures.append(f"matrix {i}: bitmap latency outside 1 and 3")
        single = query(enc, int(xs[-1]), int(ys[-1]))
        if single.value != float(matrix[-1, -1]):
            context.random_failures.append(f"matrix {i}: single query mismatch")


@then("every random matrix decodes and queries exactly")
def step_check_random(context):
    if context.random_failures:
        raise AssertionError(
            f"{len(context.random_failures)} failures, first: {context.random_failures[0]}"
        )
    assert_equal(context.variants, {Variant.BITMAP, Variant.COO}, "variants exercised")


@then("at sparsity {sparsity:f} the chosen variant is within 1.25x of the smaller format")
def step_check_size_claim(context, sparsity: float):
    """Verify the chosen format is never much larger than the alternative."""
    rows, cols = 128, 128
    matrix = sparse_matrix(np.random.default_rng(23), rows, cols, int(np.ceil(sparsity * rows * cols)))
    chosen = encode(matrix)
    smaller = min(encode(matrix, Variant.BITMAP).encoded_bytes, encode(matrix, Variant.COO).encoded_bytes)
    assert_at_most(chosen.encoded_bytes, 1.25 * smaller, "chosen size")


@then("at sparsity {sparsity:f} COO is chosen and both sizes follow their formulas")
def step_check_high_sparsity_sizes(context, sparsity: float):
    """Verify the policy and the size bookkeeping above the threshold."""
    rows, cols = 128, 128
    matrix = sparse_matrix(np.random.default_rng(29), rows, cols, int(np.ceil(sparsity * rows * cols)))
    model = SizeModel()
    chosen = encode(matrix)
    assert_equal(chosen.variant, Variant.COO, "variant")
    nnz = int(np.count_nonzero(matrix))
    assert_equal(encode(matrix, Variant.BITMAP).encoded_bytes, bitmap_size(rows, cols, nnz, model), "bitmap bytes")
    assert_equal(chosen.encoded_bytes, coo_size(nnz, chosen.payload.num_nodes, model), "COO bytes")


@when('I take the sparsity census of a {res:d}^3 scene with factor sparsity "{targets}"')
def step_census_targets(context, res: int, targets: str):
    """Census of a generated scene with cyclic sparsity targets."""
    values = tuple(float(t) for t in targets.split(","))
    context.scene = cached_scene(context, res, 0.05, factor_sparsity=values)
    context.census = sparsity_census(context.scene.decomp)


@then("the low-sparsity share is {share:f} within {tolerance:f}")
def step_check_low_share(context, share: float, tolerance: float):
    census = context.census
    assert_close(census.low_share, share, tolerance, "low-sparsity share")
    assert_close(census.low_share + census.high_share, 1.0, 1e-12, "share total")
    assert_equal(census.low_count + census.high_count, len(census.factors), "factor count")


@then('the census names factors like "{name}"')
def step_check_census_names(context, name: str):
    names = [f.name for f in context.census.factors]
    if name not in names:
        raise AssertionError(f"{name!r} not among census names, first few: {names[:4]}")
    decomp = context.scene.decomp
    assert_equal(len(names), 6 * decomp.rank * (1 + decomp.channels), "census size")


@when("I profile the codec queries of the scene")
def step_profile(context):
    """Profile under the policy, both forced variants and the dense baseline."""
    scene = context.scene
    context.profiles = {
        "policy": profile_queries(scene),
        "bitmap": profile_queries(scene, Variant.BITMAP),
        "coo": profile_queries(scene, Variant.COO),
        "dense": dense_codec_stats(scene),
    }


@then("every profile issues 6R(1+C) queries per occupied cell")
def step_check_query_count(context):
    scene = context.scene
    decomp = scene.decomp
    expected = scene.grid.popcount * 6 * decomp.rank * (1 + decomp.channels)
    for name, stats in context.profiles.items():
        assert_equal(stats.queries, expected, f"{name} queries")
        assert_equal(sum(stats.cycle_histogram.values()), expected, f"{name} histogram total")


@then("the forced profiles use only their own latencies")
def step_check_forced_profiles(context):
    """Verify each forced variant's latency histogram."""
    bitmap = context.profiles["bitmap"]
    if not set(bitmap.cycle_histogram) <= {1, 3}:
        raise AssertionError(f"Bitmap histogram has keys {sorted(bitmap.cycle_histogram)}")
    assert_equal(bitmap.coo_queries, 0, "COO queries under forced bitmap")
    coo = context.profiles["coo"]
    assert_equal(coo.bitmap_queries, 0, "bitmap queries under forced COO")
    assert_close(coo.coo_fraction, 1.0, 0.0, "COO fraction")
    if min(coo.cycle_histogram) < 1 or coo.coo_latency_mean < min(coo.cycle_histogram):
        raise AssertionError(f"Unexpected COO histogram {coo.cycle_histogram}")
    dense = context.profiles["dense"]
    assert_equal(dense.codec_enabled, False, "dense codec flag")
    assert_equal(set(dense.cycle_histogram), {1}, "dense latencies")


@then("the zero-product fraction is at least {fraction:f}")
def step_check_zero_products(context, fraction: float):
    assert_at_least(context.profiles["policy"].zero_product_fraction, fraction, "zero-product fraction")


@then("the encoded factors take less space than the dense ones")
def step_check_compression(context):
    stats = context.profiles["policy"]
    assert_at_most(stats.compression_ratio, 1.0, "compression ratio")


@then("a scene without zeros has low-sparsity share 1")
def step_check_dense_census(context):
    """Verify the census of a fully dense scene."""
    scene = generate_synthetic_scene(16, 0.05, 2, 3, 0, GeneratorSettings(factor_sparsity=(0.0,)))
    assert_equal(sparsity_census(scene.decomp).low_share, 1.0, "low-sparsity share")
