#include "deepbarrier/cli.hpp"
#include "deepbarrier/config.hpp"
#include "deepbarrier/errors.hpp"
#include "deepbarrier/evaluation.hpp"
#include "deepbarrier/nn/checkpoint.hpp"
#include "deepbarrier/oracles.hpp"
#include "deepbarrier/random.hpp"
#include "deepbarrier/sde_engine.hpp"
#include "deepbarrier/trainer.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace deepbarrier;

namespace {

using Overrides = std::map<std::string, std::string>;

RunConfig config_from(const std::string& text, const Overrides& overrides) {
  return parse_config(text, {overrides.begin(), overrides.end()});
}

/// Trained parameters together with the normalized config they came from.
struct Model {
  nn::Checkpoint checkpoint;
  std::vector<LossRecord> history;

  RunConfig config() const { return parse_config(checkpoint.config_text); }
};

py::dict stats_dict(const PnlStats& s) {
  py::dict d;
  d["count"] = s.count;
  d["mean"] = s.mean;
  d["std_error"] = s.std_error;
  d["std_dev"] = s.std_dev;
  d["q05"] = s.q05;
  d["q95"] = s.q95;
  d["iqr_5_95"] = s.iqr_5_95;
  d["abs_q999"] = s.abs_q999;
  d["breached_fraction"] = s.breached_fraction;
  return d;
}

Eigen::MatrixXd as_x0(const Eigen::VectorXd& x0) { return x0.transpose(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deep BSDE pricing and hedging of barrier options";
  m.attr("__version__") = library_version();
  m.attr("CSV_SCHEMA_VERSION") = kCsvSchemaVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericFault>(m, "NumericFault", PyExc_ArithmeticError);

  m.def(
      "normalize_config",
      [](const std::string& text, const Overrides& overrides) { return dump_config(config_from(text, overrides)); },
      py::arg("text") = "", py::arg("overrides") = Overrides{},
      "Parse YAML config text and return it with every key in canonical form.");
  m.def(
      "config_hash", [](const std::string& text) { return config_hash(parse_config(text)); }, py::arg("text") = "");

  m.def(
      "bs_vanilla",
      [](double spot, double strike, double rate, double vol, double maturity, const std::string& option) {
        const auto q = bs_vanilla(spot, strike, rate, vol, maturity, parse_option_type(option));
        return py::make_tuple(q.price, q.delta);
      },
      py::arg("spot"), py::arg("strike"), py::arg("rate"), py::arg("vol"), py::arg("maturity"),
      py::arg("option") = "call", "Black-Scholes (price, delta).");
  m.def(
      "barrier_up_out_call",
      [](double spot, double strike, double barrier, double rate, double vol, double maturity, double rebate) {
        const auto q = barrier_up_out_call(spot, strike, barrier, rate, vol, maturity, rebate);
        return py::make_tuple(q.price, q.delta);
      },
      py::arg("spot"), py::arg("strike"), py::arg("barrier"), py::arg("rate"), py::arg("vol"), py::arg("maturity"),
      py::arg("rebate") = 0.0, "Continuously monitored up-and-out call (price, delta).");
  m.def("bridge_no_breach_prob", &bridge_no_breach_prob, py::arg("x_start"), py::arg("x_end"), py::arg("barrier"),
        py::arg("vol"), py::arg("dt"));
  m.def("discretely_monitored_upper", &discretely_monitored_upper, py::arg("barrier"), py::arg("vol"), py::arg("dt"));

  m.def(
      "mc_price",
      [](const std::string& config, double spot, long paths, bool bridge, std::uint64_t seed) {
        const RunConfig cfg = parse_config(config);
        McOptions opt;
        opt.paths = paths;
        opt.bridge = bridge;
        opt.seed = seed;
        McEstimate est;
        {
          py::gil_scoped_release release;
          est = mc_price(cfg.model, cfg.instrument, TimeGrid{cfg.instrument.maturity, cfg.train.steps},
                         Eigen::VectorXd::Constant(cfg.model.dim, spot), opt);
        }
        return py::make_tuple(est.price, est.std_error);
      },
      py::arg("config") = "", py::arg("spot") = 100.0, py::arg("paths") = 100000, py::arg("bridge") = false,
      py::arg("seed") = 1, "Monte-Carlo reference (price, std_error) for the configured instrument.");

  m.def(
      "simulate_paths",
      [](const std::string& config, const Eigen::VectorXd& x0, std::uint64_t seed) {
        const RunConfig cfg = parse_config(config);
        if (cfg.model.dim != 1) throw ValidationError("simulate_paths binding supports dim 1");
        const TimeGrid grid{cfg.instrument.maturity, cfg.train.steps};
        const PathBatch paths = simulate_paths(cfg.model, grid, as_x0(x0), seed);
        Eigen::MatrixXd out(grid.steps + 1, x0.size());
        for (int i = 0; i <= grid.steps; ++i) out.row(i) = paths.levels[static_cast<std::size_t>(i)].row(0);
        return out;
      },
      py::arg("config"), py::arg("x0"), py::arg("seed"), "Euler paths as a (steps + 1, paths) array.");

  py::class_<Model>(m, "Model")
      .def_property_readonly("config", [](const Model& self) { return self.checkpoint.config_text; })
      .def_property_readonly("mini_batches", [](const Model& self) { return self.checkpoint.next_batch; })
      .def_property_readonly("history",
                             [](const Model& self) {
                               Eigen::MatrixXd h(static_cast<Eigen::Index>(self.history.size()), 4);
                               for (std::size_t k = 0; k < self.history.size(); ++k) {
                                 const auto& r = self.history[k];
                                 h.row(static_cast<Eigen::Index>(k)) << static_cast<double>(r.step), r.loss,
                                     r.loss_std, r.running_loss;
                               }
                               return h;
                             },
                             "Columns: step, loss, loss_std, running_loss.")
      .def(
          "price",
          [](const Model& self, const Eigen::VectorXd& x0) {
            Eigen::VectorXd out(x0.size());
            for (Eigen::Index k = 0; k < x0.size(); ++k) {
              out(k) = price(self.checkpoint.params, Eigen::VectorXd::Constant(1, x0(k)));
            }
            return out;
          },
          py::arg("x0"), "Learned Y0 at each initial level.")
      .def(
          "hedge",
          [](const Model& self, long paths, std::uint64_t eval_seed) {
            const RunConfig cfg = self.config();
            const TimeGrid grid{cfg.instrument.maturity, cfg.train.steps};
            const RiskNeutralGenerator gen(cfg.model.rate);
            py::dict out;
            PnlStats learned, analytic;
            const bool closed_form = analytic_supported(cfg.model, cfg.instrument);
            {
              py::gil_scoped_release release;
              const PathBatch batch = evaluation_paths(cfg.train, cfg.model, grid, paths, eval_seed);
              learned = pnl_stats(
                  hedge_simulate(LearnedStrategy(self.checkpoint.params), batch, cfg.model, grid, cfg.instrument, gen));
              if (closed_form) {
                analytic = pnl_stats(hedge_simulate(AnalyticStrategy(cfg.model, cfg.instrument, grid, cfg.hedge), batch,
                                                    cfg.model, grid, cfg.instrument, gen));
              }
            }
            out["learned"] = stats_dict(learned);
            if (closed_form) out["analytic"] = stats_dict(analytic);
            return out;
          },
          py::arg("paths") = 10000, py::arg("eval_seed") = 1, "Out-of-sample hedging PnL statistics.")
      .def("save", [](const Model& self, const std::filesystem::path& path) { nn::save_checkpoint(path, self.checkpoint); })
      .def_static(
          "load", [](const std::filesystem::path& path) { return Model{nn::load_checkpoint(path), {}}; },
          py::arg("path"));

  m.def(
      "train",
      [](const std::string& config, const Overrides& overrides, std::function<void(long, double)> progress,
         long progress_stride) {
        const RunConfig cfg = config_from(config, overrides);
        const std::string text = dump_config(cfg);
        TrainHooks hooks;
        hooks.config_text = text;
        TrainResult res;
        const RiskNeutralGenerator gen(cfg.model.rate);
        if (progress) {
          hooks.progress_stride = progress_stride;
          hooks.progress = [&progress](const LossRecord& r) { progress(r.step, r.running_loss); };
          res = train(cfg.train, cfg.model, cfg.instrument, gen, hooks);
        } else {
          py::gil_scoped_release release;
          res = train(cfg.train, cfg.model, cfg.instrument, gen, hooks);
        }
        return Model{{res.params, cfg.train.seed, cfg.train.mini_batches, text}, res.report.history};
      },
      py::arg("config") = "", py::arg("overrides") = Overrides{}, py::arg("progress") = nullptr,
      py::arg("progress_stride") = 1000, "Train on the configured problem and return the model.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line invocation; returns (exit_code, stdout, stderr).");
}
