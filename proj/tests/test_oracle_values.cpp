#include <doctest.h>

// Reference values produced by tests/oracles/compute_oracles.py, an
// independent dense numpy/scipy implementation.

#include "qvix/experiment.hpp"

using namespace qvix;

namespace {

RunArtifacts run_shipped(const std::string& name) {
  return run_experiment(load_config(std::string(QVIX_CONFIG_DIR) + "/" + name));
}

const ExtremalOutcome& outcome(const RunArtifacts& art, Extremal which) {
  for (const ExtremalOutcome& o : art.extremal) {
    if (o.which == which) return o;
  }
  FAIL("missing extremal outcome");
  return art.extremal.front();
}

constexpr double kTol = 1e-8;

}  // namespace

TEST_CASE("embedding and dual norm constants") {
  CHECK(embedding_constant(Grid(64)) == doctest::Approx(1.1458627908629513).epsilon(1e-12));
  CHECK(embedding_constant(Grid(7)) == doctest::Approx(1.1442611360630368).epsilon(1e-12));
  CHECK(dual_norm(DualElement::constant(Grid(64), 1.0)) ==
        doctest::Approx(1.0000000000001177).epsilon(1e-12));
  const RunArtifacts desk = run_shipped("thermoforming_desk.json");
  REQUIRE(desk.threshold_rhs.has_value());
  CHECK(*desk.threshold_rhs == doctest::Approx(2.1458627908630863).epsilon(1e-12));
  CHECK(*desk.threshold_lhs == 3.0);
}

TEST_CASE("toy minimal solution") {
  const RunArtifacts art = run_shipped("toy_min.json");
  const NodalFunction& u = outcome(art, Extremal::Min).run->solution;
  CHECK(u.values().minCoeff() == doctest::Approx(1.0).epsilon(kTol));
  CHECK(u.values().maxCoeff() == doctest::Approx(1.0).epsilon(kTol));
}

TEST_CASE("thermoforming contact instance") {
  const RunArtifacts art = run_shipped("thermoforming_contact.json");
  CHECK(art.ok());
  for (Extremal which : {Extremal::Min, Extremal::Max}) {
    CAPTURE(to_string(which));
    const NodalFunction& u = outcome(art, which).run->solution;
    CHECK(v_norm(u) == doctest::Approx(0.7814219256015386).epsilon(kTol));
    CHECK(u.values().minCoeff() == doctest::Approx(0.6991021088533489).epsilon(kTol));
    CHECK(u.values().maxCoeff() == doctest::Approx(0.8050002766922932).epsilon(kTol));
    CHECK(u[21] == doctest::Approx(0.760039081084481).epsilon(kTol));
  }
  REQUIRE(art.sensitivity.has_value());
  const DerivativeReport& rep = *art.sensitivity->report;
  CHECK(rep.which == Extremal::Min);
  CHECK(v_norm(*rep.alpha) == doctest::Approx(0.48827536771126057).epsilon(kTol));
  CHECK((*rep.alpha)[0] == doctest::Approx(0.0059061471361699525).epsilon(1e-6));
  CHECK((*rep.alpha)[63] == doctest::Approx(0.3557680796241794).epsilon(kTol));
  CHECK(rep.n_strict == 1);
  CHECK(rep.n_biactive == 0);
}

TEST_CASE("inverse elliptic maximal solution") {
  const RunArtifacts art = run_shipped("inverse_elliptic.json");
  CHECK(art.ok());
  const NodalFunction& u = outcome(art, Extremal::Max).run->solution;
  CHECK(v_norm(u) == doctest::Approx(1.8893763649205544).epsilon(kTol));
  CHECK(u[0] == doctest::Approx(1.9107629823519816).epsilon(kTol));
  CHECK(u[27] == doctest::Approx(1.9075592483160202).epsilon(kTol));
  CHECK(u[80] == doctest::Approx(1.8604070687029366).epsilon(kTol));
  CHECK(u.values().minCoeff() == doctest::Approx(1.8602692631373412).epsilon(kTol));
  REQUIRE(art.sensitivity.has_value());
  const DerivativeReport& rep = *art.sensitivity->report;
  CHECK(rep.which == Extremal::Max);
  CHECK(v_norm(*rep.alpha) == doctest::Approx(0.34703670050801566).epsilon(kTol));
  CHECK((*rep.alpha)[0] == doctest::Approx(-0.02313848944737752).epsilon(1e-6));
  CHECK((*rep.alpha)[27] == doctest::Approx(-0.08163497767964195).epsilon(kTol));
  CHECK((*rep.alpha)[80] == doctest::Approx(-0.2518990336976591).epsilon(kTol));
  CHECK(rep.n_strict == 20);
  CHECK(rep.n_biactive == 0);
}
