#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "symgraph/analysis.hpp"
#include "symgraph/constraints.hpp"
#include "symgraph/coupling.hpp"
#include "symgraph/graphspace.hpp"
#include "symgraph/io.hpp"
#include "symgraph/maxent.hpp"
#include "symgraph/oracle.hpp"
#include "symgraph/sampler.hpp"

namespace py = pybind11;
using namespace symgraph;

PYBIND11_MODULE(symgraph, m) {
  m.doc() = "Entropy-optimal product approximations, exact samplers, and sandwich "
            "couplings for edge-profile-constrained graph families";
  m.attr("__version__") = kArtifactVersion;

  py::register_exception<invalid_input>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<capacity_error>(m, "CapacityError", PyExc_RuntimeError);
  py::register_exception<empty_set_error>(m, "EmptySetError", PyExc_RuntimeError);
  py::register_exception<invalid_state>(m, "InvalidState", PyExc_RuntimeError);

  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &RandomStream::next_u64)
      .def("next_unit", &RandomStream::next_unit)
      .def("next_below", &RandomStream::next_below, py::arg("bound"))
      .def("substream", &RandomStream::substream, py::arg("index"));

  m.def("pair_count", &pair_count, py::arg("n"));
  m.def("enumerate_edges", &enumerate_edges, py::arg("n"));
  m.def("edge_index", &edge_index, py::arg("n"), py::arg("u"), py::arg("v"));
  m.def("edge_endpoints", &edge_endpoints, py::arg("n"), py::arg("index"));

  py::class_<EdgePartition>(m, "EdgePartition")
      .def(py::init<int, std::vector<int>>(), py::arg("n"), py::arg("part_of"))
      .def_static("trivial", &EdgePartition::trivial, py::arg("n"))
      .def_static("balanced", &EdgePartition::balanced, py::arg("n"), py::arg("k"))
      .def_static("from_costs",
                  [](int n, const std::vector<double>& costs, double bin_ratio) {
                    return EdgePartition::from_costs(n, costs, bin_ratio);
                  },
                  py::arg("n"), py::arg("costs"), py::arg("bin_ratio"))
      .def_property_readonly("n", &EdgePartition::n)
      .def_property_readonly("k", &EdgePartition::k)
      .def_property_readonly("num_edges", &EdgePartition::num_edges)
      .def_property_readonly("part_sizes", &EdgePartition::part_sizes)
      .def("part_of", [](const EdgePartition& p, std::int64_t e) { return p.part_of(e); },
           py::arg("edge"))
      .def("parts", &EdgePartition::parts);

  py::class_<Graph>(m, "Graph")
      .def(py::init<int>(), py::arg("n"))
      .def_static("complete", &Graph::complete, py::arg("n"))
      .def_static("from_edges",
                  [](int n, const std::vector<std::pair<int, int>>& edges) {
                    return Graph::from_edges(n, edges);
                  },
                  py::arg("n"), py::arg("edges"))
      .def_property_readonly("n", &Graph::n)
      .def("has_edge", &Graph::has_edge, py::arg("edge"))
      .def("set_edge", &Graph::set_edge, py::arg("edge"), py::arg("present"))
      .def("edge_count", &Graph::edge_count)
      .def("complement", &Graph::complement)
      .def("edges", [](const Graph& g) {
        std::vector<std::pair<int, int>> out;
        for (std::int64_t e = 0; e < g.num_slots(); ++e)
          if (g.has_edge(e)) out.push_back(edge_endpoints(g.n(), e));
        return out;
      });

  m.def("edge_profile", &edge_profile, py::arg("graph"), py::arg("partition"));
  m.def("density_profile",
        [](const Profile& v, const EdgePartition& p) { return density_profile(v, p); },
        py::arg("profile"), py::arg("partition"));

  py::class_<ConstraintSpec>(m, "ConstraintSpec")
      .def_static("budget", &ConstraintSpec::budget, py::arg("costs"), py::arg("budget"))
      .def_static("linear", &ConstraintSpec::linear, py::arg("a"), py::arg("b"))
      .def_static("box", &ConstraintSpec::box, py::arg("lo"), py::arg("hi"))
      .def_static("spectral", &ConstraintSpec::spectral, py::arg("rho"), py::arg("connector"),
                  py::arg("blocks"), py::arg("threshold") = 1.0)
      .def_static("intersection", &ConstraintSpec::intersection, py::arg("members"))
      .def_static("from_json", [](const std::string& text) {
        return spec_from_json(nlohmann::json::parse(text));
      })
      .def("to_json", [](const ConstraintSpec& spec) { return spec_to_json(spec).dump(); });

  m.def("contains",
        [](const ConstraintSpec& spec, const Profile& v, const EdgePartition& p) {
          return contains(spec, v, p);
        },
        py::arg("spec"), py::arg("profile"), py::arg("partition"));
  py::class_<FeasibleRegion>(m, "FeasibleRegion")
      .def(py::init([](const ConstraintSpec& spec, const EdgePartition& part) {
             return FeasibleRegion{spec, part};
           }),
           py::arg("spec"), py::arg("partition"))
      .def("contains", &FeasibleRegion::contains, py::arg("profile"))
      .def("enumerate_profiles", &FeasibleRegion::enumerate_profiles,
           py::arg("cap") = std::int64_t{10'000'000})
      .def("empty", &FeasibleRegion::empty, py::arg("cap") = std::int64_t{10'000'000});
  m.def("branching_matrix",
        [](const std::vector<std::vector<double>>& counts, const std::vector<double>& rho,
           int connector, int n) { return branching_matrix(counts, rho, connector, n); },
        py::arg("block_counts"), py::arg("rho"), py::arg("connector"), py::arg("n"));
  m.def("spectral_norm", &spectral_norm, py::arg("matrix"));
  m.def("verify_convexity", &verify_convexity, py::arg("spec"), py::arg("partition"),
        py::arg("cap") = std::int64_t{10'000'000});
  m.def("profile_set_convex", &profile_set_convex, py::arg("feasible"));

  m.def("ent", &ent, py::arg("profile"), py::arg("partition"));
  m.def("p_entropy",
        [](const RealProfile& v, const EdgePartition& p) { return p_entropy(v, p); },
        py::arg("profile"), py::arg("partition"));
  m.def("stirling_gap", &stirling_gap, py::arg("profile"), py::arg("partition"));

  py::class_<MaxEntSolution>(m, "MaxEntSolution")
      .def_readonly("m_star", &MaxEntSolution::m_star)
      .def_readonly("a_star", &MaxEntSolution::a_star)
      .def_readonly("q_star", &MaxEntSolution::q_star)
      .def_readonly("duals", &MaxEntSolution::duals)
      .def_readonly("objective", &MaxEntSolution::objective)
      .def_readonly("kkt_residual", &MaxEntSolution::kkt_residual)
      .def_readonly("iterations", &MaxEntSolution::iterations)
      .def_property_readonly("status",
                             [](const MaxEntSolution& s) { return to_string(s.status); });

  m.def("maximize_entropy",
        [](const EdgePartition& part, const ConstraintSpec& spec, double tol) {
          SolveOptions opts;
          opts.tol = tol;
          return maximize_entropy(part, spec, opts);
        },
        py::arg("partition"), py::arg("spec"), py::arg("tol") = 1e-10);
  m.def("product_matrix", &product_matrix, py::arg("solution"), py::arg("partition"));

  py::class_<ThicknessResult>(m, "ThicknessResult")
      .def_readonly("mu", &ThicknessResult::mu)
      .def_readonly("tilde_m", &ThicknessResult::tilde_m);
  m.def("thickness", &thickness, py::arg("m_star"), py::arg("partition"));
  m.def("condition_number", &condition_number, py::arg("mu"), py::arg("k"), py::arg("n"));
  m.def("resolution", &resolution, py::arg("lambda_cond"));

  py::class_<BoundValue>(m, "BoundValue")
      .def_readonly("value", &BoundValue::value)
      .def_readonly("valid", &BoundValue::valid);
  m.def("concentration_bound", &concentration_bound, py::arg("eps"), py::arg("mu"),
        py::arg("lambda_cond"));
  m.def("sandwich_delta", &sandwich_delta, py::arg("eps"), py::arg("mu"), py::arg("lambda_cond"));
  m.def("entropy_decay_bound", &entropy_decay_bound, py::arg("w"), py::arg("m_star"),
        py::arg("partition"));
  m.def("well_conditioned_parts", &well_conditioned_parts, py::arg("m_star"), py::arg("partition"));

  py::class_<DiagnosticsReport>(m, "DiagnosticsReport")
      .def_readonly("n", &DiagnosticsReport::n)
      .def_readonly("k", &DiagnosticsReport::k)
      .def_readonly("mu", &DiagnosticsReport::mu)
      .def_readonly("tilde_m", &DiagnosticsReport::tilde_m)
      .def_readonly("well_conditioned", &DiagnosticsReport::well_conditioned)
      .def_property_readonly("lambda_cond",
                             [](const DiagnosticsReport& r) { return r.lambda; })
      .def_property_readonly("resolution",
                             [](const DiagnosticsReport& r) { return r.resolution; });
  m.def("diagnose", &diagnose, py::arg("m_star"), py::arg("partition"));

  py::enum_<ProfileStrategy>(m, "ProfileStrategy")
      .value("enumeration", ProfileStrategy::enumeration)
      .value("budget_dp", ProfileStrategy::budget_dp)
      .value("mcmc", ProfileStrategy::mcmc);

  m.def("sample_profile",
        [](const EdgePartition& part, const ConstraintSpec& spec, ProfileStrategy strategy,
           RandomStream& rng) { return sample_profile(part, spec, strategy, rng); },
        py::arg("partition"), py::arg("spec"), py::arg("strategy"), py::arg("rng"));
  m.def("sample_within_parts", &sample_within_parts, py::arg("profile"), py::arg("partition"),
        py::arg("rng"));
  m.def("sample_uniform",
        [](const EdgePartition& part, const ConstraintSpec& spec, ProfileStrategy strategy,
           RandomStream& rng) { return sample_uniform(part, spec, strategy, rng); },
        py::arg("partition"), py::arg("spec"), py::arg("strategy"), py::arg("rng"));
  m.def("sample_product",
        [](const std::vector<double>& q, int n, RandomStream& rng) {
          return sample_product(q, n, rng);
        },
        py::arg("q"), py::arg("n"), py::arg("rng"));

  py::class_<SampFlipTriple>(m, "SampFlipTriple")
      .def_readonly("x", &SampFlipTriple::x)
      .def_readonly("z_minus", &SampFlipTriple::z_minus)
      .def_readonly("z_plus", &SampFlipTriple::z_plus)
      .def_readonly("nested", &SampFlipTriple::nested)
      .def_readonly("p_minus", &SampFlipTriple::p_minus)
      .def_readonly("p_plus", &SampFlipTriple::p_plus);
  m.def("couple_samp_flip",
        [](std::int64_t universe, std::int64_t m, double delta, const std::vector<double>& u) {
          return couple_samp_flip(universe, m, delta, u);
        },
        py::arg("universe"), py::arg("m"), py::arg("delta"), py::arg("uniforms"));

  py::class_<CouplingOutcome>(m, "CouplingOutcome")
      .def_readonly("g_minus", &CouplingOutcome::g_minus)
      .def_readonly("g", &CouplingOutcome::g)
      .def_readonly("g_plus", &CouplingOutcome::g_plus)
      .def_readonly("holds", &CouplingOutcome::holds)
      .def_readonly("per_part_holds", &CouplingOutcome::per_part_holds)
      .def_readonly("profile_used", &CouplingOutcome::profile_used);
  m.def("sandwich_sample",
        [](const EdgePartition& part, const ConstraintSpec& spec, double eps,
           ProfileStrategy strategy, RandomStream& rng) {
          return sandwich_sample(part, spec, eps, strategy, rng);
        },
        py::arg("partition"), py::arg("spec"), py::arg("eps"), py::arg("strategy"), py::arg("rng"));

  py::class_<RateEstimate>(m, "RateEstimate")
      .def_readonly("rate", &RateEstimate::rate)
      .def_readonly("ci_halfwidth", &RateEstimate::ci_halfwidth)
      .def_readonly("degenerate", &RateEstimate::degenerate)
      .def_readonly("trials", &RateEstimate::trials);
  m.def("empirical_sandwich_rate",
        [](const EdgePartition& part, const ConstraintSpec& spec, double eps, std::int64_t trials,
           RandomStream& rng, int jobs) {
          return empirical_sandwich_rate(part, spec, eps, trials, rng, jobs);
        },
        py::arg("partition"), py::arg("spec"), py::arg("eps"), py::arg("trials"), py::arg("rng"),
        py::arg("jobs") = 1);

  py::class_<ProfileCount>(m, "ProfileCount")
      .def_readonly("v", &ProfileCount::v)
      .def_readonly("count", &ProfileCount::count)
      .def_readonly("log_count", &ProfileCount::log_count)
      .def_readonly("prob", &ProfileCount::prob);
  py::class_<ExactSetSummary>(m, "ExactSetSummary")
      .def_readonly("explicit_mode", &ExactSetSummary::explicit_mode)
      .def_readonly("size", &ExactSetSummary::size)
      .def_readonly("count_exact", &ExactSetSummary::count_exact)
      .def_readonly("log_size", &ExactSetSummary::log_size)
      .def_readonly("empty", &ExactSetSummary::empty)
      .def_readonly("profiles", &ExactSetSummary::profiles);
  m.def("enumerate_set",
        [](const EdgePartition& part, const ConstraintSpec& spec) {
          return enumerate_set(part, spec);
        },
        py::arg("partition"), py::arg("spec"));
  m.def("total_variation",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return total_variation(a, b);
        },
        py::arg("d1"), py::arg("d2"));
  m.def("profile_space_size", [](const EdgePartition& part) {
    const ProfileSpaceSize s = profile_space_size(part);
    return py::make_tuple(s.value, s.bound_holds);
  });
  m.def("entropy_gap_full_space", &entropy_gap_full_space, py::arg("partition"));
  m.def("exact_profile_distribution",
        [](const ExactSetSummary& summary) { return exact_profile_distribution(summary); },
        py::arg("summary"));
  m.def("summarize_profiles", &summarize_profiles, py::arg("partition"), py::arg("profiles"));
  m.def("verify_conditional_factorization",
        [](const ExactSetSummary& summary, const EdgePartition& part, int families,
           RandomStream& rng) {
          return verify_conditional_factorization(summary, part, families, rng);
        },
        py::arg("summary"), py::arg("partition"), py::arg("families"), py::arg("rng"));

  py::class_<UnimodalityResult>(m, "UnimodalityResult")
      .def_readonly("delta", &UnimodalityResult::delta)
      .def_readonly("adjusted_lambda", &UnimodalityResult::adjusted_lambda)
      .def_readonly("adjusted_valid", &UnimodalityResult::adjusted_valid);
  m.def("unimodality_distance", &unimodality_distance, py::arg("m_star"), py::arg("feasible"),
        py::arg("partition"));
  m.def("feasible_rounding", &feasible_rounding, py::arg("m_star"), py::arg("spec"),
        py::arg("partition"));
  m.def("permute_within_parts", &permute_within_parts, py::arg("graph"), py::arg("partition"),
        py::arg("rng"));
}
