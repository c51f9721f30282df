from .arm import arm_instruction_histogram, decode_word, encode_instruction
from .payload import PayloadFeatures, byte_histogram, md5_digest, payload_features, sparse_byte_histogram
from .vectorize import (
    OOV,
    EventVectorizer,
    FeatureSpace,
    FeatureVector,
    build_feature_space,
    event_labels,
    vectorize,
    vectorize_many,
)

__all__ = [
    "OOV", "EventVectorizer", "FeatureSpace", "FeatureVector", "PayloadFeatures",
    "arm_instruction_histogram", "build_feature_space", "byte_histogram", "decode_word",
    "encode_instruction", "event_labels", "md5_digest", "payload_features",
    "sparse_byte_histogram", "vectorize", "vectorize_many",
]
