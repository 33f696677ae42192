// Copyright 2026 The xlir Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

#include "xlir/error.h"
#include "xlir/gradcheck.h"
#include "xlir/kv_config.h"
#include "xlir/loss.h"
#include "xlir/metrics.h"
#include "xlir/similarity.h"
#include "xlir/trainer.h"

namespace py = pybind11;
using namespace xlir;

namespace {

// Python values are stringified so dict configs parse like config files.
KeyValues to_key_values(const py::dict& d) {
  KeyValues kv;
  for (const auto& [k, v] : d) {
    std::string text;
    if (py::isinstance<py::bool_>(v)) {
      text = v.cast<bool>() ? "true" : "false";
    } else if (py::isinstance<py::float_>(v)) {
      text = format_double(v.cast<double>());
    } else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (const auto& item : v) {
        text += (text.empty() ? "" : ",") + format_double(item.cast<double>());
      }
    } else {
      text = py::str(v).cast<std::string>();
    }
    kv.set(py::str(k).cast<std::string>(), text);
  }
  return kv;
}

py::dict report_dict(const MetricReport& r) {
  py::dict out;
  for (std::size_t m = 0; m < kNumMetrics; ++m) out[kMetricNames[m]] = r.values[m];
  return out;
}

py::dict loss_dict(const LossValue& v) {
  py::dict out;
  out["value"] = v.value;
  out["derivative"] = v.dvalue_dr;
  out["underflow"] = v.underflow;
  return out;
}

CorpusSplit corpus_for(const KeyValues& kv, const std::optional<std::string>& corpus_dir,
                       std::uint64_t seed) {
  if (corpus_dir) return load_split(*corpus_dir);
  SyntheticConfig sc = SyntheticConfig::from_key_values(kv);
  return generate_synthetic(sc, seed);
}

}  // namespace

PYBIND11_MODULE(_xlir, m) {
  m.doc() = "Cross-lingual retrieval training and evaluation engine";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def(
      "smooth_cosine",
      [](const std::vector<double>& q, const std::vector<double>& d, double epsilon,
         bool diagnostic) {
        const auto r = smooth_cosine(q, d, {epsilon, diagnostic});
        py::dict out;
        out["score"] = r.score;
        out["grad_q"] = r.grad_q;
        out["grad_d"] = r.grad_d;
        out["norm_q"] = r.norm_q;
        out["norm_d"] = r.norm_d;
        return out;
      },
      py::arg("q"), py::arg("d"), py::arg("epsilon") = 1.0, py::arg("diagnostic") = false,
      "Score q.d / ((|q|+eps)(|d|+eps)) and its gradients.");
  m.def(
      "cosine",
      [](const std::vector<double>& a, const std::vector<double>& b) { return cosine(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "gradient_bound",
      [](double epsilon, double norm) { return gradient_bound({epsilon, epsilon == 0.0}, norm); },
      py::arg("epsilon"), py::arg("norm"));

  m.def(
      "loss",
      [](const std::string& kind, double r, int y, const std::vector<double>& theta,
         double po_scale) {
        return loss_dict(evaluate_loss(parse_loss_kind(kind), r, y, ThresholdVector(theta),
                                       LossOptions{po_scale}));
      },
      py::arg("kind"), py::arg("r"), py::arg("y"),
      py::arg("theta") = std::vector<double>{0.2, 0.7}, py::arg("po_scale") = 5.0,
      "kind is 'sosl', 'mse' or 'po'.");
  m.def(
      "sosl_gradient_bound",
      [](int y, const std::vector<double>& theta) {
        return sosl_gradient_bound(y, ThresholdVector(theta));
      },
      py::arg("y"), py::arg("theta") = std::vector<double>{0.2, 0.7});

  m.def(
      "query_metrics",
      [](const std::vector<std::tuple<std::string, double, int>>& scored) {
        std::vector<RankedEntry> entries;
        for (const auto& [id, s, y] : scored) entries.push_back({id, s, y});
        const auto q = query_metrics(rank("q", std::move(entries)));
        py::dict out;
        for (std::size_t i = 0; i < kNumMetrics; ++i) {
          out[kMetricNames[i]] = q.values[i] ? py::cast(*q.values[i]) : py::none();
        }
        return out;
      },
      py::arg("scored"), "Metrics for one query from (doc_id, score, label) tuples.");

  m.def(
      "generate",
      [](const py::dict& config, std::uint64_t seed, const std::string& out_dir) {
        const auto split =
            generate_synthetic(SyntheticConfig::from_key_values(to_key_values(config)), seed);
        write_split(split, out_dir);
        py::dict out;
        out["queries"] = split.corpus.queries().size();
        out["documents"] = split.corpus.docs().size();
        out["triples"] = split.corpus.triples().size();
        return out;
      },
      py::arg("config"), py::arg("seed"), py::arg("out_dir"),
      "Write a planted synthetic corpus with its split to out_dir.");

  m.def(
      "train",
      [](const py::dict& config, std::optional<std::string> corpus_dir,
         std::optional<std::string> out_dir) {
        const KeyValues kv = to_key_values(config);
        const TrainConfig tc = TrainConfig::from_key_values(kv);
        const CorpusSplit split = corpus_for(kv, corpus_dir, tc.seed);
        TrainOptions opts;
        if (out_dir) opts.out_dir = *out_dir;
        TrainResult res;
        {
          py::gil_scoped_release release;
          res = train(tc, split, opts);
        }
        py::dict out;
        py::list losses;
        for (const auto& e : res.history) losses.append(e.train_loss);
        out["train_loss"] = losses;
        out["best_epoch"] = res.best_epoch;
        out["steps"] = res.final_checkpoint.step;
        out["test"] = res.test ? py::object(report_dict(*res.test)) : py::none();
        out["manifest"] = res.manifest.str();
        return out;
      },
      py::arg("config"), py::arg("corpus_dir") = py::none(), py::arg("out_dir") = py::none(),
      "Train from key=value settings; generates a synthetic corpus when corpus_dir is None.");

  m.def(
      "evaluate",
      [](const std::string& corpus_dir, const std::string& checkpoint, double epsilon,
         const std::string& split_name) {
        const CorpusSplit split = load_split(corpus_dir);
        const Checkpoint ck = load_checkpoint(checkpoint);
        const auto& triples = split_name == "train"        ? split.train
                              : split_name == "validation" ? split.validation
                                                           : split.test;
        return report_dict(
            evaluate(ck.params, split.corpus, triples, {epsilon, epsilon == 0.0}).report);
      },
      py::arg("corpus_dir"), py::arg("checkpoint"), py::arg("epsilon") = 1.0,
      py::arg("split") = "test");

  m.def(
      "gradcheck",
      [](std::uint64_t seed, std::size_t instances) {
        py::list out;
        for (const auto& c : run_gradcheck_suite(seed, instances)) {
          py::dict row;
          row["name"] = c.name;
          row["max_rel_error"] = c.max_rel_error;
          row["tolerance"] = c.tolerance;
          row["passed"] = c.passed;
          out.append(row);
        }
        return out;
      },
      py::arg("seed") = 1, py::arg("instances") = 100);
}
