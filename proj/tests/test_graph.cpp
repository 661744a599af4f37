#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "passnet/graph.hpp"
#include "support/oracles.hpp"

using namespace passnet;
using Catch::Approx;

namespace {

const std::vector<std::pair<int, int>> kStrongEdges = {{1, 2}, {2, 3}, {4, 3}, {5, 4},
                                                       {2, 5}, {3, 1}, {4, 1}, {5, 1}};
const std::vector<std::pair<int, int>> kWeakEdges = {{3, 2}, {2, 1}, {5, 4}, {4, 1}};

Digraph strong_graph() { return Digraph(5, kStrongEdges); }
Digraph weak_graph() { return Digraph(5, kWeakEdges); }

}  // namespace

TEST_CASE("digraph construction rejects malformed edge lists") {
  CHECK_THROWS_AS(Digraph(2, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{1, 2}, {1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{1, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(0, {}), std::invalid_argument);
  CHECK_NOTHROW(Digraph(2, {{1, 2}, {2, 1}}));
}

TEST_CASE("incidence matrices of a single edge") {
  const auto inc = incidence_matrices(Digraph(2, {{1, 2}}));
  CHECK(inc.E(0, 0) == 1.0);
  CHECK(inc.E(1, 0) == -1.0);
  CHECK(inc.B_o(0, 0) == 1.0);
  CHECK(inc.B_o(1, 0) == 0.0);
  CHECK(inc.B_i(0, 0) == 0.0);
  CHECK(inc.B_i(1, 0) == -1.0);
}

TEST_CASE("incidence matrices of an empty edge list are 3x0") {
  const auto inc = incidence_matrices(Digraph(3, {}));
  CHECK(inc.E.rows() == 3);
  CHECK(inc.E.cols() == 0);
  CHECK(inc.B_o.cols() == 0);
  CHECK(inc.B_i.cols() == 0);
}

TEST_CASE("strong case-study graph has 5x8 incidence with zero column sums") {
  const auto inc = incidence_matrices(strong_graph());
  REQUIRE(inc.E.rows() == 5);
  REQUIRE(inc.E.cols() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    double sum = 0.0;
    int plus = 0, minus = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      sum += inc.E(i, k);
      if (inc.E(i, k) == 1.0) ++plus;
      if (inc.E(i, k) == -1.0) ++minus;
    }
    CHECK(sum == 0.0);
    CHECK(plus == 1);
    CHECK(minus == 1);
  }
}

TEST_CASE("laplacians of a single edge") {
  const auto lap = laplacians(Digraph(2, {{1, 2}}));
  CHECK(lap.L(0, 0) == 1.0);
  CHECK(lap.L(0, 1) == -1.0);
  CHECK(lap.L(1, 0) == -1.0);
  CHECK(lap.L(1, 1) == 1.0);
  CHECK(lap.L_o(0, 0) == 1.0);
  CHECK(lap.L_o(0, 1) == -1.0);
  CHECK(lap.L_o(1, 0) == 0.0);
  CHECK(lap.L_o(1, 1) == 0.0);
}

TEST_CASE("directed 3-cycle: L_o is I minus the cyclic shift, spectrum {0,3,3}") {
  const Digraph cycle(3, {{1, 2}, {2, 3}, {3, 1}});
  const auto lap = laplacians(cycle);
  const double expected[3][3] = {{1, -1, 0}, {0, 1, -1}, {-1, 0, 1}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(lap.L_o(i, j) == expected[i][j]);

  const auto ev = symmetric_eigenvalues(lap.L);
  REQUIRE(ev.size() == 3);
  CHECK(ev[0] == Approx(0.0).margin(1e-9));
  CHECK(ev[1] == Approx(3.0).margin(1e-9));
  CHECK(ev[2] == Approx(3.0).margin(1e-9));
}

TEST_CASE("weak case-study graph equals the undirected path 3-2-1-4-5") {
  const auto lap = laplacians(weak_graph());
  // Path Laplacian: degree 2 on vertices 1,2,4; degree 1 on 3,5.
  Matrix expected(5, 5);
  auto link = [&](int a, int b) {
    expected(a - 1, a - 1) += 1.0;
    expected(b - 1, b - 1) += 1.0;
    expected(a - 1, b - 1) -= 1.0;
    expected(b - 1, a - 1) -= 1.0;
  };
  link(3, 2);
  link(2, 1);
  link(1, 4);
  link(4, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(lap.L(i, j) == expected(i, j));
}

TEST_CASE("globally reachable node detection") {
  CHECK(has_globally_reachable_node(weak_graph()));   // node 1 is a global sink
  CHECK(has_globally_reachable_node(strong_graph()));
  CHECK(has_globally_reachable_node(Digraph(3, {{1, 2}, {2, 3}, {3, 1}})));
  CHECK_FALSE(has_globally_reachable_node(Digraph(2, {})));
  CHECK_FALSE(has_globally_reachable_node(Digraph(4, {{1, 2}, {3, 4}})));
}

TEST_CASE("undirected spectrum of the paper graphs") {
  const auto strong = undirected_spectrum(strong_graph());
  CHECK(strong.lambda2 == Approx(3.0).margin(1e-6));
  CHECK(strong.eigenvalues.front() == Approx(0.0).margin(1e-9));

  const auto weak = undirected_spectrum(weak_graph());
  CHECK(weak.lambda2 == Approx(0.382).margin(1e-3));

  const auto k2 = undirected_spectrum(Digraph(2, {{1, 2}}));
  REQUIRE(k2.eigenvalues.size() == 2);
  CHECK(k2.eigenvalues[0] == Approx(0.0).margin(1e-9));
  CHECK(k2.eigenvalues[1] == Approx(2.0).margin(1e-9));
  CHECK(k2.lambda_max == Approx(2.0).margin(1e-9));
}

TEST_CASE("max out-degree") {
  CHECK(max_out_degree(strong_graph()) == 2);
  CHECK(max_out_degree(weak_graph()) == 1);
  CHECK(max_out_degree(Digraph(3, {})) == 0);
}

TEST_CASE("incidence identities hold on random digraphs") {
  std::mt19937 rng(20240817);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const Digraph g = oracles::random_digraph(rng, n, 0.4);
    const auto inc = incidence_matrices(g);
    const auto lap = laplacians(g);

    const Matrix sum = inc.B_o + inc.B_i;
    CHECK((sum - inc.E).max_abs() == 0.0);
    CHECK((lap.L - inc.E * inc.E.transposed()).max_abs() == 0.0);
    CHECK((lap.L - (lap.L_i + lap.L_o)).max_abs() == 0.0);

    // Column sums of E vanish; diagonal of L_o is the out-degree sequence.
    std::vector<int> outdeg(static_cast<std::size_t>(n), 0);
    for (const auto& [h, t] : g.edges) {
      (void)t;
      ++outdeg[h - 1];
    }
    for (std::size_t k = 0; k < g.edge_count(); ++k) {
      double col = 0.0;
      for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) col += inc.E(i, k);
      CHECK(col == 0.0);
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
      CHECK(lap.L_o(i, i) == static_cast<double>(outdeg[i]));
  }
}

TEST_CASE("lambda2 positive whenever a globally reachable node exists") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 8);
    const Digraph g = oracles::random_reachable_digraph(rng, n, static_cast<int>(rng() % 5));
    REQUIRE(has_globally_reachable_node(g));
    CHECK(undirected_connected(g));
    CHECK(undirected_spectrum(g).lambda2 > 0.0);
  }
}

TEST_CASE("spectrum is invariant under vertex relabeling") {
  std::mt19937 rng(99);
  const Digraph g = strong_graph();
  const auto base = undirected_spectrum(g).eigenvalues;

  std::vector<int> perm = {1, 2, 3, 4, 5};
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<int, int>> edges;
    for (const auto& [h, t] : kStrongEdges)
      edges.emplace_back(perm[h - 1], perm[t - 1]);
    const auto relabeled = undirected_spectrum(Digraph(5, edges)).eigenvalues;
    for (std::size_t i = 0; i < base.size(); ++i)
      CHECK(relabeled[i] == Approx(base[i]).margin(1e-9));
  }
}

TEST_CASE("jacobi eigensolver matches hand spectra and orthogonality") {
  // K2 plus an isolated vertex: spectrum {0, 0, 2}.
  const auto ev = symmetric_eigenvalues(laplacians(Digraph(3, {{1, 2}})).L);
  CHECK(ev[0] == Approx(0.0).margin(1e-12));
  CHECK(ev[1] == Approx(0.0).margin(1e-12));
  CHECK(ev[2] == Approx(2.0).margin(1e-12));

  // Eigenvectors reconstruct the matrix: A = V diag(w) V^T.
  const Matrix L = laplacians(strong_graph()).L;
  const auto eig = symmetric_eigen(L);
  Matrix recon(5, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 5; ++k)
        acc += eig.vectors(i, k) * eig.values[k] * eig.vectors(j, k);
      recon(i, j) = acc;
    }
  CHECK((recon - L).max_abs() < 1e-10);
}
