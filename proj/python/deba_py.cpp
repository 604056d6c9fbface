// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <span>
#include <string>

#include "deba/engine.hpp"
#include "deba/error.hpp"
#include "deba/profiler.hpp"
#include "deba/signals.hpp"
#include "deba/sim.hpp"
#include "deba/trace_io.hpp"

namespace py = pybind11;

namespace {

using GradientArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> as_span(const GradientArray& a) {
  return {a.data(), static_cast<std::size_t>(a.size())};
}

py::tuple outcome_tuple(const deba::StepOutcome& o) {
  return py::make_tuple(std::string(deba::action_name(o.decision.action)),
                        o.batch_after);
}

deba::SchedulerConfig config_or_default(const std::optional<deba::SchedulerConfig>& c) {
  return c.value_or(deba::SchedulerConfig{});
}

}  // namespace

PYBIND11_MODULE(_deba, m) {
  m.doc() = "Adaptive batch-size scheduler engine";
  m.attr("__version__") = std::string(deba::version());

  static py::exception<deba::Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const deba::Error& e) {
      const std::string msg = std::string(deba::errc_name(e.code())) + ": " + e.what();
      py::set_error(error, msg.c_str());
    }
  });

  py::class_<deba::SchedulerConfig>(m, "Config")
      .def(py::init<>())
      .def_readwrite("theta_stab", &deba::SchedulerConfig::theta_stab)
      .def_readwrite("theta_conf", &deba::SchedulerConfig::theta_conf)
      .def_readwrite("alpha_grow", &deba::SchedulerConfig::alpha_grow)
      .def_readwrite("alpha_roll", &deba::SchedulerConfig::alpha_roll)
      .def_readwrite("b_min", &deba::SchedulerConfig::b_min)
      .def_readwrite("b_max", &deba::SchedulerConfig::b_max)
      .def_readwrite("cooldown_epochs", &deba::SchedulerConfig::cooldown_epochs)
      .def_readwrite("window_len", &deba::SchedulerConfig::window_len)
      .def_readwrite("epsilon", &deba::SchedulerConfig::epsilon)
      .def_property(
          "stats_mode",
          [](const deba::SchedulerConfig& c) {
            return std::string(deba::stats_mode_name(c.stats_mode));
          },
          [](deba::SchedulerConfig& c, const std::string& s) {
            const auto mode = deba::parse_stats_mode(s);
            if (!mode) throw py::value_error("stats_mode: sliding_window | full_history");
            c.stats_mode = *mode;
          })
      .def("validate", [](const deba::SchedulerConfig& c) { deba::validate(c); })
      .def_static("from_file", &deba::read_config, py::arg("path"))
      .def("to_file",
           [](const deba::SchedulerConfig& c, const std::filesystem::path& p) {
             deba::write_config(c, p);
           })
      .def_static(
          "preset",
          [](const std::string& name, std::optional<deba::SchedulerConfig> base) {
            auto c = deba::apply_preset(name, config_or_default(base));
            if (!c) throw py::value_error("unknown preset '" + name + "'");
            return *c;
          },
          py::arg("name"), py::arg("base") = py::none())
      .def("__eq__", [](const deba::SchedulerConfig& a,
                        const deba::SchedulerConfig& b) { return a == b; })
      .def("__repr__", [](const deba::SchedulerConfig& c) {
        return "Config(theta_stab=" + deba::format_real(c.theta_stab) +
               ", theta_conf=" + deba::format_real(c.theta_conf) + ")";
      });

  py::class_<deba::Engine>(m, "Engine")
      .def(py::init<const deba::SchedulerConfig&, std::int64_t>(),
           py::arg("config"), py::arg("initial_batch") = 64)
      .def(
          "step",
          [](deba::Engine& e, std::int64_t epoch, double loss, double norm,
             double variance) { return outcome_tuple(e.step(epoch, loss, norm, variance)); },
          py::arg("epoch"), py::arg("loss"), py::arg("grad_norm"),
          py::arg("grad_variance"))
      .def(
          "step_raw",
          [](deba::Engine& e, std::int64_t epoch, double loss, const GradientArray& grad) {
            if (grad.ndim() != 1) throw py::value_error("gradient must be 1-D");
            deba::StepOutcome o;
            {
              py::gil_scoped_release release;
              o = e.step_raw(epoch, loss, as_span(grad));
            }
            return outcome_tuple(o);
          },
          py::arg("epoch"), py::arg("loss"), py::arg("gradient"))
      .def("close", &deba::Engine::close)
      .def_property_readonly("is_open", &deba::Engine::is_open)
      .def_property_readonly("current_batch", &deba::Engine::current_batch)
      .def_property_readonly("epoch",
                             [](const deba::Engine& e) { return e.state().epoch; })
      .def("last_frame",
           [](const deba::Engine& e) {
             const auto& log = e.state().decision_log;
             if (log.empty()) throw py::value_error("no epoch has been stepped");
             const auto& f = log.back().frame;
             py::dict d;
             d["epoch"] = f.epoch;
             d["grad_variance"] = f.grad_variance;
             d["grad_norm"] = f.grad_norm;
             d["grad_norm_variation"] = f.grad_norm_variation;
             d["loss_variation"] = f.loss_variation;
             d["confidence"] = f.confidence;
             d["stable_gradients"] = f.stable_gradients;
             d["stable_loss"] = f.stable_loss;
             d["reason"] = std::string(deba::reason_name(log.back().decision.reason));
             return d;
           })
      .def("decision_log",
           [](const deba::Engine& e) {
             return deba::format_decision_log(e.state().decision_log);
           })
      .def("state_json",
           [](const deba::Engine& e) { return deba::serialize_state(e.state()); });

  m.def(
      "gradient_variance",
      [](const GradientArray& g) { return deba::gradient_variance(as_span(g)); },
      py::arg("gradient"));
  m.def(
      "gradient_norm",
      [](const GradientArray& g) { return deba::gradient_norm(as_span(g)); },
      py::arg("gradient"));
  m.def(
      "classify_taxonomy",
      [](double mu, double sigma) {
        return std::string(deba::taxonomy_name(deba::classify_taxonomy(mu, sigma)));
      },
      py::arg("mu_s"), py::arg("sigma_s"));
  m.def("preset_names", [] {
    std::vector<std::string> out;
    for (auto n : deba::preset_names()) out.emplace_back(n);
    return out;
  });
  m.def(
      "calibrate",
      [](const std::filesystem::path& trace,
         std::optional<deba::SchedulerConfig> base) {
        const auto records = deba::read_trace(trace).records;
        const auto th = deba::calibrate_thresholds(
            deba::profile_frames(records, config_or_default(base)));
        return py::make_tuple(th.theta_stab, th.theta_conf);
      },
      py::arg("trace"), py::arg("config") = py::none());
  m.def(
      "profile",
      [](const std::vector<std::filesystem::path>& traces,
         std::optional<deba::SchedulerConfig> base) {
        const auto config = config_or_default(base);
        std::vector<deba::StabilityProfile> profiles;
        py::list scores;
        for (const auto& p : traces) {
          profiles.push_back(deba::stability_score(
              deba::profile_frames(deba::read_trace(p).records, config)));
          scores.append(profiles.back().stability_score);
        }
        const auto agg = deba::aggregate_seeds(profiles);
        py::dict d;
        d["scores"] = scores;
        d["mu_s"] = agg.mu_s;
        d["sigma_s"] = agg.sigma_s;
        d["taxonomy"] = std::string(deba::taxonomy_name(agg.taxonomy));
        return d;
      },
      py::arg("traces"), py::arg("config") = py::none());
  m.def(
      "replay",
      [](const std::filesystem::path& trace, const deba::SchedulerConfig& config,
         std::optional<std::int64_t> initial_batch) {
        const auto t = deba::read_trace(trace);
        const auto b0 = initial_batch.value_or(t.header.initial_batch.value_or(64));
        return deba::format_decision_log(deba::replay(t.records, config, b0).log);
      },
      py::arg("trace"), py::arg("config"), py::arg("initial_batch") = py::none());
}
