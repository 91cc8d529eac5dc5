#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "nearfield/polar_dictionary.hpp"

using namespace nearfield;

namespace {

ArrayGeometry reference_array() { return ArrayGeometry::half_wavelength(256, 100e9); }

// Direct-sum value of |sum_n exp(j n pi dtheta)| / N.
double dirichlet_sum(int N, double dtheta) {
  Complex s = 0;
  for (int n = 0; n < N; ++n) s += std::polar(1.0, n * kPi * dtheta);
  return std::abs(s) / N;
}

}  // namespace

TEST_CASE("reference dictionary scalars") {
  const DictionaryConfig cfg{ArrayGeometry(256, 0.0015, 0.003), 1.2, 3.0};
  CHECK(cfg.threshold_distance() == doctest::Approx(17.0667).epsilon(1e-5));
  const PolarDictionary dict = build_polar_dictionary(cfg);
  CHECK(dict.rings == 6);
  CHECK(dict.num_columns() == 1536);
  // broadside column of each ring
  const double expected[] = {kInfiniteDistance, 17.0667, 8.5333, 5.6889, 4.2667, 3.4133};
  for (int s = 0; s < 6; ++s) {
    const Atom& atom = dict.atoms[static_cast<std::size_t>(s * 256 + 128)];
    CHECK(atom.ring == s);
    if (s == 0)
      CHECK(atom.distance == kInfiniteDistance);
    else
      CHECK(atom.distance == doctest::Approx(expected[s] * (1 - atom.angle * atom.angle)).epsilon(1e-4));
  }
  for (int q = 0; q < dict.num_columns(); ++q) CHECK(std::abs(dict.W.col(q).norm() - 1.0) < 1e-12);
}

TEST_CASE("angular special case") {
  const ArrayGeometry g = reference_array();
  const PolarDictionary dict = build_polar_dictionary({g, 1.2, 100.0});
  CHECK(dict.rings == 1);
  const Eigen::MatrixXcd F = build_angular_dictionary(g);
  CHECK((dict.W - F).cwiseAbs().maxCoeff() == 0.0);
  CHECK((F.adjoint() * F - Eigen::MatrixXcd::Identity(256, 256)).cwiseAbs().maxCoeff() < 1e-10);

  const PolarDictionary full = build_polar_dictionary({g, 1.2, 3.0});
  CHECK((full.W.leftCols(256) - F).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-element angular dictionary") {
  const Eigen::MatrixXcd F = build_angular_dictionary(ArrayGeometry(2, 0.5, 1.0));
  const double h = 1 / std::sqrt(2.0);
  CHECK(std::abs(F(0, 0) - Complex(h, 0)) < 1e-15);
  CHECK(std::abs(F(1, 0) - Complex(0, -h)) < 1e-15);
  CHECK(std::abs(F(1, 1) - Complex(0, h)) < 1e-15);
}

TEST_CASE("dictionary config validation") {
  CHECK_THROWS(build_polar_dictionary({reference_array(), 0.0, 3.0}));
  CHECK_THROWS(build_polar_dictionary({reference_array(), 1.2, -1.0}));
}

TEST_CASE("coherence functions") {
  const ArrayGeometry g = reference_array();
  SUBCASE("exact") {
    const Eigen::VectorXcd v = near_steering(g, 0.1, 4.0);
    CHECK(coherence_exact(v, v) == doctest::Approx(1.0));
    CHECK(coherence_exact(far_steering(g, 0.2), far_steering(g, 0.2 + 2.0 / 256)) < 1e-12);
  }
  SUBCASE("same ring Dirichlet kernel") {
    CHECK(coherence_approx_same_ring(256, 0.3, 0.3) == 1.0);
    for (int m = 1; m < 256; m += 17) CHECK(coherence_approx_same_ring(256, 0.1, 0.1 + 2.0 * m / 256) < 1e-12);
    CHECK(coherence_approx_same_ring(256, 0.0, 1.0 / 256) ==
          doctest::Approx(dirichlet_sum(256, 1.0 / 256)).epsilon(1e-12));
  }
  SUBCASE("same angle Fresnel approximation") {
    CHECK(coherence_approx_same_angle(g, 0.2, 6.0, 6.0) == 1.0);
    const double Z = DictionaryConfig{g, 1.2, 3.0}.threshold_distance();
    for (double theta : {0.0, 0.5, -0.8}) {
      for (int s = 1; s < 5; ++s) {
        const double f = 1 - theta * theta;
        const double rp = Z * f / s, rq = Z * f / (s + 1);
        CHECK(coherence_beta(g, theta, rp, rq) == doctest::Approx(1.2).epsilon(1e-12));
        CHECK(coherence_approx_same_angle(g, theta, rp, rq) == doctest::Approx(g_magnitude(1.2)));
      }
    }
    CHECK(std::abs(coherence_approx_same_angle(g, 0.0, 5.0, 10.0) -
                   coherence_exact(near_steering(g, 0.0, 5.0), near_steering(g, 0.0, 10.0))) < 0.05);
  }
  SUBCASE("Lemma check at beta = 1.6") {
    // choose r_2 so that beta(r_1, r_2) = 1.6 at broadside
    const double r1 = 5.0;
    const double k = 256.0 * 256.0 * g.spacing() * g.spacing() / (2 * g.wavelength());
    const double r2 = 1.0 / (1.0 / r1 - 1.6 * 1.6 / k);
    REQUIRE(coherence_beta(g, 0.0, r1, r2) == doctest::Approx(1.6));
    CHECK(std::abs(coherence_exact(near_steering(g, 0.0, r1), near_steering(g, 0.0, r2)) - 0.5) < 0.1);
  }
}

TEST_CASE("coherence audit") {
  SUBCASE("angular dictionary has zero adjacent-angle coherence") {
    const PolarDictionary dict = build_polar_dictionary({reference_array(), 1.2, 100.0});
    const CoherenceReport rep = audit_coherence(dict, false);
    CHECK(rep.adjacent_rings.empty());
    for (const auto& p : rep.adjacent_angles) CHECK(p.exact < 1e-12);
    CHECK(rep.max_coherence == -1.0);
  }
  SUBCASE("reference dictionary") {
    const PolarDictionary dict = build_polar_dictionary({reference_array(), 1.2, 3.0});
    const CoherenceReport rep = audit_coherence(dict, false);
    CHECK(rep.design_coherence == doctest::Approx(g_magnitude(1.2)));
    int checked = 0;
    for (const auto& p : rep.adjacent_rings) {
      if (!p.in_fresnel_region) continue;
      ++checked;
      CHECK(std::abs(p.exact - rep.design_coherence) < 0.15);
    }
    CHECK(checked > 0);

    nlohmann::json j = rep;
    const CoherenceReport back = j.get<CoherenceReport>();
    CHECK(back == rep);
    CHECK(nlohmann::json::parse(j.dump()).get<CoherenceReport>() == rep);
  }
}

TEST_CASE("uniform dictionary") {
  const ArrayGeometry g = reference_array();
  const PolarDictionary one = uniform_dictionary(g, 1, 3.0, 90.0);
  CHECK(one.num_columns() == 256);
  for (const auto& atom : one.atoms) CHECK(atom.distance == 3.0);
  const PolarDictionary six = uniform_dictionary(g, 6, 3.0, rayleigh_distance(g));
  CHECK(six.num_columns() == 6 * 256);
  CHECK(six.atoms[256 * 2 + 7].distance == doctest::Approx(3.0 + 2.0 / 6 * (rayleigh_distance(g) - 3.0)));
  CHECK_THROWS(uniform_dictionary(g, 0, 3.0, 90.0));
  CHECK_THROWS(uniform_dictionary(g, 2, 3.0, 2.0));
}

TEST_CASE("dictionary export") {
  const PolarDictionary dict = build_polar_dictionary({ArrayGeometry::half_wavelength(32, 100e9), 1.2, 0.05});
  const auto path = std::filesystem::temp_directory_path() / "nf_dict_test.bin";
  write_dictionary_binary(dict, path.string());
  const Eigen::MatrixXcd back = read_dictionary_binary(path.string());
  CHECK(back == dict.W);
  std::filesystem::remove(path);

  const nlohmann::json meta = dictionary_metadata(dict);
  CHECK(meta["columns"].size() == static_cast<std::size_t>(dict.num_columns()));
  CHECK(meta["columns"][0]["distance"].is_null());
}
