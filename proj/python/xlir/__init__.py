# Copyright 2026 The xlir Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Cross-lingual retrieval training and evaluation engine."""

from ._xlir import (
    FormatError,
    InvalidArgument,
    NumericError,
    SingularityError,
    cosine,
    evaluate,
    generate,
    gradcheck,
    gradient_bound,
    loss,
    query_metrics,
    smooth_cosine,
    sosl_gradient_bound,
    train,
)

__all__ = [
    "FormatError",
    "InvalidArgument",
    "NumericError",
    "SingularityError",
    "cosine",
    "evaluate",
    "generate",
    "gradcheck",
    "gradient_bound",
    "loss",
    "query_metrics",
    "smooth_cosine",
    "sosl_gradient_bound",
    "train",
]
