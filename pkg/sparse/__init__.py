"""Hybrid bitmap/COO sparse codec for factor vectors and matrices."""

from .query import QueryOutOfBoundsError, QueryResult
from .bitmap import BitmapEncoding, decode_bitmap, encode_bitmap, query_bitmap, query_bitmap_many
from .coo import CooEncoding, TreeNode, decode_coo, encode_coo, query_coo, query_coo_many, search_path
from .hybrid import (
    HybridEncoding,
    SizeModel,
    Variant,
    bitmap_size,
    choose_variant,
    coo_size,
    decode,
    dump_encoding,
    encode,
    encoded_size,
    load_encoding,
    query,
    query_many,
)
from .census import FactorSparsity, SparsityCensus, iter_named_factors, sparsity_census
from .profile import CodecStats, dense_codec_stats, profile_queries

__all__ = [
    "BitmapEncoding",
    "CodecStats",
    "CooEncoding",
    "FactorSparsity",
    "HybridEncoding",
    "QueryOutOfBoundsError",
    "QueryResult",
    "SizeModel",
    "SparsityCensus",
    "TreeNode",
    "Variant",
    "bitmap_size",
    "choose_variant",
    "coo_size",
    "decode",
    "decode_bitmap",
    "decode_coo",
    "dense_codec_stats",
    "dump_encoding",
    "encode",
    "encode_bitmap",
    "encode_coo",
    "encoded_size",
    "iter_named_factors",
    "load_encoding",
    "profile_queries",
    "query",
    "query_bitmap",
    "query_bitmap_many",
    "query_coo",
    "query_coo_many",
    "search_path",
    "sparsity_census",
]
