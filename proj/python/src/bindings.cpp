#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "dynclust/adversary.hpp"
#include "dynclust/errors.hpp"
#include "dynclust/kcenter.hpp"
#include "dynclust/lsh.hpp"
#include "dynclust/reference.hpp"
#include "dynclust/runner.hpp"
#include "dynclust/stream_io.hpp"

namespace py = pybind11;
using namespace dynclust;

namespace {

std::shared_ptr<LpMetric> metric_from(py::array_t<double, py::array::c_style | py::array::forcecast> points,
                                      double p) {
  if (points.ndim() != 2) throw Error(ErrorCode::kInvalidArgument, "points must be a 2-d array");
  auto m = std::make_shared<LpMetric>(points.shape(1), p);
  auto view = points.unchecked<2>();
  for (py::ssize_t i = 0; i < points.shape(0); ++i)
    m->add_point(std::span<const double>(view.data(i, 0), static_cast<std::size_t>(points.shape(1))));
  return m;
}

// Owns the point table and oracle the engine borrows.
class PyKCenter {
 public:
  PyKCenter(py::array_t<double, py::array::c_style | py::array::forcecast> points, std::size_t k, double eps,
            std::uint64_t seed, double p, std::optional<double> r_min, std::optional<double> r_max)
      : metric_(metric_from(points, p)), oracle_(metric_) {
    auto b = estimate_bounds(*metric_);
    KCenterConfig cfg;
    cfg.k = k;
    cfg.eps = eps;
    cfg.seed = seed;
    cfg.r_min = r_min.value_or(b.r_min);
    cfg.r_max = r_max.value_or(b.r_max);
    engine_ = std::make_unique<KCenterEngine>(oracle_, cfg);
  }

  void insert(PointIndex p) { engine_->insert(check(p)); }
  void erase(PointIndex p) { engine_->erase(check(p)); }
  double cost() const { return engine_->solution().cost_estimate; }
  std::vector<PointIndex> centers() const { return engine_->solution().centers; }
  PointIndex membership(PointIndex p) const { return engine_->membership(p); }
  std::vector<PointIndex> cluster(PointIndex p) const { return engine_->enumerate_cluster(p); }
  std::uint64_t queries() const { return oracle_.queries(); }

 private:
  PointIndex check(PointIndex p) const {
    if (p >= metric_->size()) throw Error(ErrorCode::kUnknownPoint, "index " + std::to_string(p));
    return p;
  }

  std::shared_ptr<LpMetric> metric_;
  DistanceOracle oracle_;
  std::unique_ptr<KCenterEngine> engine_;
};

std::string run_text(const std::string& text, const std::string& algo, std::size_t k, double eps, std::uint64_t seed,
                     std::optional<double> c, std::optional<double> delta, std::optional<std::size_t> B,
                     const std::string& solver) {
  RunConfig cfg;
  cfg.algo = parse_algo(algo);
  cfg.k = k;
  cfg.eps = eps;
  cfg.seed = seed;
  cfg.c = c;
  cfg.delta = delta;
  cfg.B = B;
  cfg.solver = solver;
  validate(cfg);
  std::istringstream in(text);
  auto stream = read_stream(in);
  std::ostringstream out;
  py::gil_scoped_release release;
  run_stream(cfg, stream, out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fully dynamic metric clustering engines.";

  static py::exception<Error> error(m, "DynclustError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr ep) {
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<PyKCenter>(m, "KCenter")
      .def(py::init<py::array_t<double, py::array::c_style | py::array::forcecast>, std::size_t, double,
                    std::uint64_t, double, std::optional<double>, std::optional<double>>(),
           py::arg("points"), py::arg("k"), py::arg("eps") = 0.5, py::arg("seed") = 1, py::arg("p") = 2.0,
           py::arg("r_min") = py::none(), py::arg("r_max") = py::none())
      .def("insert", &PyKCenter::insert, py::arg("index"))
      .def("erase", &PyKCenter::erase, py::arg("index"))
      .def("cost", &PyKCenter::cost)
      .def("centers", &PyKCenter::centers)
      .def("membership", &PyKCenter::membership, py::arg("index"))
      .def("cluster", &PyKCenter::cluster, py::arg("index"))
      .def_property_readonly("queries", &PyKCenter::queries);

  m.def("run_stream_text", &run_text, py::arg("text"), py::arg("algo") = "lfmis-kcenter", py::arg("k") = 1,
        py::arg("eps") = 0.5, py::arg("seed") = 1, py::arg("c") = py::none(), py::arg("delta") = py::none(),
        py::arg("B") = py::none(), py::arg("solver") = "exact",
        "Run an update stream in the text format; returns JSON lines.");

  m.def(
      "exact_kcenter",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> points, std::size_t k, double p) {
        auto metric = metric_from(points, p);
        std::vector<PointIndex> idx(metric->size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<PointIndex>(i);
        auto opt = exact_kcenter(idx, k, [&](PointIndex a, PointIndex b) { return metric->distance(a, b); });
        return py::make_tuple(opt.cost, opt.centers);
      },
      py::arg("points"), py::arg("k"), py::arg("p") = 2.0);

  m.def(
      "lsh_params",
      [](double p1, double p2, std::size_t n, double delta) {
        auto prm = lsh_params(p1, p2, n, delta);
        py::dict d;
        d["p1"] = prm.p1;
        d["p2"] = prm.p2;
        d["rho"] = prm.rho;
        d["t"] = prm.t;
        d["s"] = prm.s;
        return d;
      },
      py::arg("p1"), py::arg("p2"), py::arg("n"), py::arg("delta"));

  m.def(
      "gauntlet",
      [](const std::string& algo, const std::string& budget, std::uint64_t ops, std::size_t k, bool enforce) {
        GauntletConfig cfg;
        cfg.algo = algo;
        cfg.budget = budget;
        cfg.ops = ops;
        cfg.k = k;
        cfg.enforce_budget = enforce;
        GauntletResult res;
        {
          py::gil_scoped_release release;
          res = run_gauntlet(cfg);
        }
        py::dict d;
        d["ops_done"] = res.ops_done;
        d["budget_exceeded"] = res.budget_exceeded;
        d["error"] = res.error;
        d["answers_checked"] = res.answers_checked;
        d["answers_failed"] = res.answers_failed;
        d["max_gap"] = res.max_gap;
        d["clean_ops"] = res.clean.size();
        return d;
      },
      py::arg("algo") = "diameter", py::arg("budget") = "4", py::arg("ops") = 256, py::arg("k") = 1,
      py::arg("enforce") = true);
}
