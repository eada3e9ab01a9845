"""kextract: a unified knowledge-extraction toolkit.

Named entity recognition, relation extraction and attribute extraction in
standard, low-resource, document-level and multimodal settings, driven by a
config-composed train/validate/predict engine and served over HTTP with
schema-constrained triple output.
"""

__version__ = "0.1.0"

ARTIFACT_FORMAT_VERSION = 1
