#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "softnet/diffusion.hpp"
#include "softnet/kernel.hpp"
#include "softnet/model.hpp"
#include "softnet/ntk.hpp"
#include "softnet/rng.hpp"
#include "softnet/training.hpp"

namespace py = pybind11;
using namespace softnet;

PYBIND11_MODULE(softnet, mod) {
  mod.doc() = "two-layer softmax network NTK laboratory";

  py::register_exception<DimensionError>(mod, "DimensionError",
                                         PyExc_ValueError);
  py::register_exception<ValueError>(mod, "ValueError", PyExc_ValueError);
  py::register_exception<NumericError>(mod, "NumericError",
                                       PyExc_RuntimeError);

  py::class_<Dataset>(mod, "Dataset")
      .def(py::init<Matrix, Matrix>(), py::arg("X"), py::arg("Y"))
      .def_readonly("X", &Dataset::X)
      .def_readonly("Y", &Dataset::Y)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("d1", &Dataset::d1)
      .def_property_readonly("d2", &Dataset::d2);

  py::class_<NetworkState>(mod, "NetworkState")
      .def(py::init([](Matrix W, Matrix a) {
             NetworkState net{std::move(W), std::move(a)};
             net.validate();
             return net;
           }),
           py::arg("W"), py::arg("a"))
      .def_readwrite("W", &NetworkState::W)
      .def_readonly("a", &NetworkState::a)
      .def_property_readonly("m", &NetworkState::m);

  py::class_<Rng>(mod, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", [](Rng& r) { return r.uniform(); })
      .def("gaussian", [](Rng& r) { return r.gaussian(); })
      .def("unit_ball", &Rng::unit_ball, py::arg("dim"));

  mod.def("derive_seed", &derive_seed, py::arg("master"), py::arg("label"),
          py::arg("index") = 0);

  py::enum_<GradientForm>(mod, "GradientForm")
      .value("DEFINITION", GradientForm::kDefinition)
      .value("CLAIM", GradientForm::kClaim);

  mod.def("forward", &forward, py::arg("net"), py::arg("x"));
  mod.def("predict_all", &predict_all, py::arg("net"), py::arg("data"));
  mod.def("loss", &loss, py::arg("F"), py::arg("Y"));
  mod.def("analytic_gradient", &analytic_gradient, py::arg("net"),
          py::arg("data"), py::arg("form") = GradientForm::kClaim);
  mod.def("fd_gradient", &fd_gradient, py::arg("net"), py::arg("data"),
          py::arg("h"));

  mod.def("symmetric_init", &symmetric_init, py::arg("m"), py::arg("d1"),
          py::arg("d2"), py::arg("sigma"), py::arg("seed"));
  mod.def("compute_B", &compute_B, py::arg("sigma"), py::arg("n"),
          py::arg("d"), py::arg("delta"), py::arg("C"));
  mod.def("compute_D", &compute_D, py::arg("m"), py::arg("lambda_"),
          py::arg("B"), py::arg("n"), py::arg("d"),
          py::arg("init_loss_frob"));
  mod.def("gd_step", &gd_step, py::arg("net"), py::arg("eta"),
          py::arg("grad"));

  py::class_<TheoryParams>(mod, "TheoryParams")
      .def_readonly("sigma", &TheoryParams::sigma)
      .def_readonly("delta", &TheoryParams::delta)
      .def_readonly("B", &TheoryParams::B)
      .def_readonly("lambda_", &TheoryParams::lambda)
      .def_readonly("m", &TheoryParams::m)
      .def_readonly("eta", &TheoryParams::eta)
      .def_readonly("T_hat", &TheoryParams::T_hat)
      .def_readonly("R", &TheoryParams::R)
      .def_readonly("D", &TheoryParams::D);

  mod.def("theory_hyperparams", &theory_hyperparams, py::arg("n"),
          py::arg("d"), py::arg("lambda_"), py::arg("B"), py::arg("eps"),
          py::arg("delta"), py::arg("c_m") = 1.0, py::arg("c_T") = 1.0);

  py::enum_<TrainMode>(mod, "TrainMode")
      .value("THEORY", TrainMode::kTheory)
      .value("PRACTICAL", TrainMode::kPractical);

  py::class_<TrainConfig>(mod, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("mode", &TrainConfig::mode)
      .def_readwrite("m", &TrainConfig::m)
      .def_readwrite("sigma", &TrainConfig::sigma)
      .def_readwrite("eta", &TrainConfig::eta)
      .def_readwrite("max_steps", &TrainConfig::max_steps)
      .def_readwrite("delta", &TrainConfig::delta)
      .def_readwrite("eps", &TrainConfig::eps)
      .def_readwrite("record_decomposition",
                     &TrainConfig::record_decomposition);

  py::class_<DecompositionRecord>(mod, "DecompositionRecord")
      .def_readonly("C0", &DecompositionRecord::C0)
      .def_readonly("C1", &DecompositionRecord::C1)
      .def_readonly("C2", &DecompositionRecord::C2)
      .def_readonly("C3", &DecompositionRecord::C3)
      .def_readonly("v2_norm", &DecompositionRecord::v2_norm)
      .def_readonly("q1_inner", &DecompositionRecord::q1_inner)
      .def_readonly("q1_quadform", &DecompositionRecord::q1_quadform);

  py::class_<TrainStep>(mod, "TrainStep")
      .def_readonly("step", &TrainStep::step)
      .def_readonly("loss", &TrainStep::loss)
      .def_readonly("max_drift", &TrainStep::max_drift)
      .def_readonly("max_grad", &TrainStep::max_grad)
      .def_readonly("ratio", &TrainStep::ratio)
      .def_readonly("has_decomposition", &TrainStep::has_decomposition)
      .def_readonly("decomposition", &TrainStep::decomposition);

  py::class_<TrainTrace>(mod, "TrainTrace")
      .def_readonly("steps", &TrainTrace::steps)
      .def_readonly("init", &TrainTrace::init)
      .def_readonly("final", &TrainTrace::final)
      .def_readonly("eta", &TrainTrace::eta)
      .def_readonly("aborted", &TrainTrace::aborted);

  mod.def(
      "train",
      [](const Dataset& data, const TrainConfig& cfg, std::uint64_t seed) {
        TheoryParams params;
        TrainTrace trace = train(data, cfg, seed, &params);
        return py::make_tuple(std::move(trace), params);
      },
      py::arg("data"), py::arg("config"), py::arg("seed"));

  mod.def("loss_decomposition", &loss_decomposition, py::arg("net"),
          py::arg("data"), py::arg("eta"));

  py::class_<CheckReport>(mod, "CheckReport")
      .def_readonly("violations", &CheckReport::violations)
      .def_readonly("first_violation_step", &CheckReport::first_violation_step)
      .def_readonly("worst_margin", &CheckReport::worst_margin);

  py::class_<InductionReport>(mod, "InductionReport")
      .def_readonly("drift", &InductionReport::drift)
      .def_readonly("contraction", &InductionReport::contraction)
      .def_readonly("step_ratio", &InductionReport::step_ratio)
      .def_readonly("eta_grad", &InductionReport::eta_grad)
      .def_readonly("grad_bound", &InductionReport::grad_bound)
      .def_readonly("D", &InductionReport::D)
      .def_readonly("R", &InductionReport::R)
      .def_readonly("D_lt_R", &InductionReport::D_lt_R)
      .def("total_violations", &InductionReport::total_violations);

  mod.def("monitor_induction", &monitor_induction, py::arg("trace"),
          py::arg("params"));

  // kernel module, matrix-level interface
  mod.def(
      "gram",
      [](const NetworkState& net, const Dataset& data) {
        return gram(net, data).H;
      },
      py::arg("net"), py::arg("data"));
  mod.def(
      "gram_bruteforce",
      [](const NetworkState& net, const Dataset& data) {
        return gram_bruteforce(net, data).H;
      },
      py::arg("net"), py::arg("data"));
  mod.def(
      "min_eigenvalue",
      [](const Matrix& H) {
        GramMatrix G;
        G.H = H;
        return min_eigenvalue(G);
      },
      py::arg("H"));
  mod.def(
      "test_kernel",
      [](const NetworkState& net, const Dataset& data, const Vector& x_te) {
        return test_kernel(net, data, x_te).K;
      },
      py::arg("net"), py::arg("data"), py::arg("x_te"));

  mod.def(
      "gamma_closed_form",
      [](const Matrix& H, const Matrix& Y, int m) {
        GramMatrix G;
        G.H = H;
        const ClosedFormGamma cf = gamma_closed_form(G, Y, m);
        return py::make_tuple(cf.state.gamma, cf.degenerate);
      },
      py::arg("H"), py::arg("Y"), py::arg("m"));

  py::class_<OUParams>(mod, "OUParams")
      .def(py::init<>())
      .def_readwrite("T", &OUParams::T)
      .def_readwrite("T0", &OUParams::T0)
      .def_readwrite("g_const", &OUParams::g_const);

  mod.def("mean_decay", &mean_decay, py::arg("t"), py::arg("params"));
  mod.def("forward_sample", &forward_sample, py::arg("x0"), py::arg("t"),
          py::arg("params"), py::arg("rng"));
  mod.def(
      "gaussian_oracle_score",
      [](double t, const Vector& x, const OUParams& params, double s2) {
        return gaussian_oracle_score(t, x, params, GaussianOracle{s2});
      },
      py::arg("t"), py::arg("x"), py::arg("params"), py::arg("s2") = 1.0);
}
