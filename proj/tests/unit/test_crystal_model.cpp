#include <gtest/gtest.h>

#include <random>
#include <set>

#include "latvol/bond_volume.hpp"
#include "latvol/crystal_model.hpp"
#include "latvol/model_io.hpp"
#include "random_cases.hpp"

using namespace latvol;

namespace {

const CoupledModel& small_model() {
  static const CoupledModel m = [] {
    ProblemConfig c;
    c.N = 4;
    c.K = 2;
    c.vacancy = true;
    return build_model(c);
  }();
  return m;
}

IntVec3 site_at_tau(std::int64_t a, std::int64_t b, std::int64_t c) { return from_tau({a, b, c}); }

int find_bond(const CoupledModel& m, IntVec3 x, IntVec3 y) {
  IntVec3 r = y - x;
  if (!is_canonical(r)) {
    std::swap(x, y);
    r = -r;
  }
  const int i = m.domain.find(x), j = m.domain.find(y);
  for (std::size_t b = 0; b < m.bonds.bonds.size(); ++b) {
    const Bond& bd = m.bonds.bonds[b];
    if (bd.i == i && bd.j == j) return static_cast<int>(b);
  }
  return -1;
}

}  // namespace

TEST(NeighborSet, FccShells) {
  const CrystalBasis fcc = CrystalBasis::fcc();
  const auto nn = neighbor_set(fcc, 1.01);
  EXPECT_EQ(nn.size(), 12u);
  for (IntVec3 r : nn) EXPECT_NEAR(fcc.physical(r).norm(), 1.0, 1e-12);
  EXPECT_TRUE(neighbor_set(fcc, 0.5).empty());

  std::size_t expected = 0;
  for (int a = -8; a <= 8; ++a)
    for (int b = -8; b <= 8; ++b)
      for (int c = -8; c <= 8; ++c)
        if ((a || b || c) && fcc.physical({a, b, c}).norm() <= 3.2) ++expected;
  const auto r = neighbor_set(fcc, 3.2);
  EXPECT_EQ(r.size(), expected);
  EXPECT_EQ(canonical_half(r).size() * 2, r.size());
  for (IntVec3 d : r) EXPECT_NE(std::find(r.begin(), r.end(), -d), r.end());
}

TEST(CubeCoordinates, RoundTripAndParity) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 1000; ++k) {
    const IntVec3 x = latvol::testing::random_point(rng, -50, 50);
    const auto t = to_tau(x);
    EXPECT_EQ((t[0] + t[1] + t[2]) % 2, 0);
    EXPECT_EQ(from_tau(t), x);
  }
}

TEST(BuildDomain, LargeVacancyProblemAtomCount) {
  ProblemConfig c;
  c.N = 16;
  c.K = 2;
  c.vacancy = true;
  EXPECT_EQ(build_domain(c).free_count(), 125022u);
}

TEST(BuildDomain, NoVacancyCountsTheFullCube) {
  ProblemConfig c;
  c.N = 4;
  c.K = 2;
  c.vacancy = false;
  const DomainDecomposition d = build_domain(c);
  // |tau|_inf < 8 with even coordinate sum: 7^3 + 3 * 8^2 * 7.
  EXPECT_EQ(d.free_count(), 1687u);
  EXPECT_GE(d.find({0, 0, 0}), 0);
  c.vacancy = true;
  const DomainDecomposition v = build_domain(c);
  EXPECT_EQ(v.free_count(), 1686u);
  EXPECT_EQ(v.find({0, 0, 0}), -1);
}

TEST(BuildDomain, DirichletShellCoversEveryBondOfFreeSites) {
  const CoupledModel& m = small_model();
  for (std::size_t s = 0; s < m.domain.sites.size(); ++s) {
    if (m.domain.kind[s] == SiteKind::Dirichlet) continue;
    for (IntVec3 r : m.directions) {
      const IntVec3 x = m.domain.sites[s];
      if (x + r != IntVec3{0, 0, 0}) EXPECT_GE(m.domain.find(x + r), 0);
      if (x - r != IntVec3{0, 0, 0}) EXPECT_GE(m.domain.find(x - r), 0);
    }
  }
}

TEST(BuildDomain, RejectsBadSizes) {
  ProblemConfig c;
  c.N = 4;
  c.K = 5;
  EXPECT_THROW(build_domain(c), std::invalid_argument);
  c.K = 1;
  EXPECT_THROW(build_domain(c), std::invalid_argument);
}

TEST(BuildVacancyProblem, RejectsKEqualToN) {
  EXPECT_THROW(build_vacancy_problem(4, 4, CrystalBasis::fcc()), std::invalid_argument);
}

TEST(Mesh, PositivelyOrientedAndFillsTheShell) {
  const CoupledModel& m = small_model();
  BigInt vol6 = 0;
  for (std::size_t t = 0; t < m.mesh.tets.size(); ++t) {
    const BigInt v = signed_volume6(m.mesh.tet(t));
    ASSERT_GT(v, 0);
    vol6 += v;
  }
  // ((4N)^3 - (4K)^3) tau units, and |det G| = 2.
  EXPECT_EQ(vol6, BigInt(6 * (4096 - 512) / 2));
}

TEST(Mesh, TetsTileTheContinuumRegion) {
  const CoupledModel& m = small_model();
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<long> num(-8 * 97, 8 * 97);
  for (int q = 0; q < 100; ++q) {
    const RatVec3 x{BigRational(num(rng), 97), BigRational(num(rng), 97), BigRational(num(rng), 97)};
    const BigRational tau[3] = {x[1] + x[2], x[0] + x[2], x[0] + x[1]};
    BigRational norm = 0;
    for (const auto& t : tau) norm = std::max(norm, BigRational(abs(t)));
    const double expected = (norm > 4 && norm < 8) ? 1.0 : 0.0;
    double sum = 0.0;
    for (std::size_t t = 0; t < m.mesh.tets.size(); ++t) {
      const LatticeTet tet = m.mesh.tet(t);
      bool near = true;
      for (int a = 0; a < 3 && near; ++a) {
        std::int64_t lo = tet.v[0][a], hi = lo;
        for (const IntVec3& v : tet.v) {
          lo = std::min(lo, v[a]);
          hi = std::max(hi, v[a]);
        }
        near = x[a] >= lo && x[a] <= hi;
      }
      if (near) sum += chi_point(tet, x);
    }
    EXPECT_NEAR(sum, expected, 1e-12);
  }
}

TEST(Mesh, VerticesAreSitesAndUnitSizeAtInterface) {
  const CoupledModel& m = small_model();
  for (std::size_t v = 0; v < m.mesh.vertices.size(); ++v)
    EXPECT_EQ(m.domain.sites[m.mesh.vertex_site[v]], m.mesh.vertices[v]);
  const auto& g = m.mesh.grid;
  const auto k = std::find(g.begin(), g.end(), m.config.K);
  ASSERT_NE(k, g.end());
  EXPECT_EQ(*(k + 1) - *k, 1);
}

TEST(ClassifyBonds, Examples) {
  const CoupledModel& m = small_model();
  // Deep in the continuum shell, between tau-norms 5 and 7.
  const int deep = find_bond(m, site_at_tau(6, 0, 0), site_at_tau(6, 1, 1));
  ASSERT_GE(deep, 0);
  EXPECT_TRUE(m.bonds.continuum[deep]);
  // One endpoint atomistic.
  const int mixed = find_bond(m, site_at_tau(3, 1, 0), site_at_tau(5, 1, 0));
  ASSERT_GE(mixed, 0);
  EXPECT_FALSE(m.bonds.continuum[mixed]);
  // Inside the interface plane tau_1 = 2K.
  const int flat = find_bond(m, site_at_tau(4, 0, 0), site_at_tau(4, 1, 1));
  ASSERT_GE(flat, 0);
  EXPECT_FALSE(m.bonds.continuum[flat]);
  EXPECT_EQ(m.bonds.count_atomistic() + m.bonds.count_continuum(), m.bonds.bonds.size());
}

TEST(ClassifyBonds, EveryBondStoredOnceWithCanonicalDirection) {
  const CoupledModel& m = small_model();
  std::set<std::pair<int, int>> seen;
  for (const Bond& b : m.bonds.bonds) {
    EXPECT_TRUE(is_canonical(m.directions[b.dir]));
    EXPECT_EQ(m.domain.sites[b.j] - m.domain.sites[b.i], m.directions[b.dir]);
    EXPECT_TRUE(seen.insert({b.i, b.j}).second);
  }
}

TEST(ClassifyBonds, VacancyBondsAreRemoved) {
  const CoupledModel& m = small_model();
  for (const Bond& b : m.bonds.bonds) {
    EXPECT_NE(m.domain.sites[b.i], (IntVec3{0, 0, 0}));
    EXPECT_NE(m.domain.sites[b.j], (IntVec3{0, 0, 0}));
  }
}

TEST(EffectiveVolumes, SumOverTetsCountsContinuumBonds) {
  const CoupledModel& m = small_model();
  std::vector<double> count(m.directions.size(), 0.0), sum(m.directions.size(), 0.0);
  for (std::size_t b = 0; b < m.bonds.bonds.size(); ++b)
    if (m.bonds.continuum[b]) count[m.bonds.bonds[b].dir] += 1.0;
  for (std::size_t t = 0; t < m.mesh.tets.size(); ++t)
    for (std::size_t d = 0; d < m.directions.size(); ++d) sum[d] += m.omega(t, int(d));
  for (std::size_t d = 0; d < m.directions.size(); ++d) EXPECT_NEAR(sum[d], count[d], 1e-9);
}

TEST(EffectiveVolumes, BoundedByLenAndEqualWithoutNearbyAtomisticBonds) {
  const CoupledModel& m = small_model();
  // Atomistic-treated segments per direction, including the two removed at the vacancy.
  std::vector<std::vector<std::pair<IntVec3, IntVec3>>> excluded(m.directions.size());
  for (std::size_t b = 0; b < m.bonds.bonds.size(); ++b) {
    if (m.bonds.continuum[b]) continue;
    const Bond& bd = m.bonds.bonds[b];
    excluded[bd.dir].push_back({m.domain.sites[bd.i], m.domain.sites[bd.j]});
  }
  for (std::size_t d = 0; d < m.directions.size(); ++d) {
    excluded[d].push_back({{0, 0, 0}, m.directions[d]});
    excluded[d].push_back({-m.directions[d], {0, 0, 0}});
  }
  int untouched = 0, touched = 0;
  for (std::size_t t = 0; t < m.mesh.tets.size(); t += 97) {
    const LatticeTet tet = m.mesh.tet(t);
    IntVec3 lo = tet.v[0], hi = tet.v[0];
    for (const IntVec3& v : tet.v)
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], v[a]);
        hi[a] = std::max(hi[a], v[a]);
      }
    const SegmentAverager avg(tet);
    for (std::size_t d = 0; d < m.directions.size(); ++d) {
      const double len = len_tetra(tet, m.directions[d]);
      const double w = m.omega(t, int(d));
      EXPECT_GE(w, -1e-9);
      EXPECT_LE(w, len + 1e-9);
      bool hit = false;
      for (const auto& [a, b] : excluded[d]) {
        bool overlap = true;
        for (int k = 0; k < 3 && overlap; ++k)
          overlap = std::max(a[k], b[k]) >= lo[k] && std::min(a[k], b[k]) <= hi[k];
        if (overlap && avg(a, b - a) > 0.0) {
          hit = true;
          break;
        }
      }
      if (!hit) {
        EXPECT_NEAR(w, len, 1e-12);
        ++untouched;
      } else {
        ++touched;
      }
    }
  }
  EXPECT_GT(untouched, 0);
  EXPECT_GT(touched, 0);
}

TEST(EffectiveVolumes, BoxOfKuhnTetsHasVolumeForAxisDirection) {
  // Columns of e3 bonds cross an axis-aligned box, so Len of the box is its volume.
  const IntVec3 e[3] = {{2, 0, 0}, {0, 3, 0}, {0, 0, 4}};
  int perm[3] = {0, 1, 2};
  double sum = 0.0;
  do {
    LatticeTet t;
    t.v[0] = {1, -1, 5};
    t.v[1] = t.v[0] + e[perm[0]];
    t.v[2] = t.v[1] + e[perm[1]];
    t.v[3] = t.v[2] + e[perm[2]];
    sum += len_tetra(t, {0, 0, 1});
  } while (std::next_permutation(perm, perm + 3));
  EXPECT_NEAR(sum, 24.0, 1e-10);
}

TEST(CauchyBornVolumes, EqualTetVolume) {
  const CoupledModel& m = small_model();
  const EffectiveVolumes cb = cauchy_born_volumes(m.mesh, int(m.directions.size()));
  for (std::size_t t = 0; t < m.mesh.tets.size(); t += 13)
    EXPECT_DOUBLE_EQ(cb(t, 0), latvol::testing::tet_volume(m.mesh.tet(t)));
}

TEST(BuildModel, SiteRepresentationReproducesAffineMaps) {
  const CoupledModel& m = small_model();
  for (std::size_t s = 0; s < m.domain.sites.size(); ++s) {
    const SiteRep& rep = m.site_rep[s];
    double wsum = 0.0;
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    for (int k = 0; k < rep.n; ++k) {
      wsum += rep.weight[k];
      const IntVec3 p = m.domain.sites[rep.site[k]];
      x += rep.weight[k] * Eigen::Vector3d(double(p.x), double(p.y), double(p.z));
    }
    const IntVec3 p = m.domain.sites[s];
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    EXPECT_NEAR((x - Eigen::Vector3d(double(p.x), double(p.y), double(p.z))).norm(), 0.0, 1e-12);
  }
}

TEST(ModelIo, RoundTrip) {
  const ModelDocument d = to_document(small_model());
  const std::string text = write_model_json(d);
  const ModelDocument back = read_model_json(text);
  EXPECT_TRUE(back == d);
  EXPECT_EQ(write_model_json(back), text);
}

TEST(ModelIo, RejectsWrongVersion) {
  EXPECT_THROW(read_model_json(R"({"format_version": "other"})"), std::runtime_error);
  EXPECT_THROW(read_model_json("not json"), std::runtime_error);
}

TEST(ModelIo, ShortestRoundTripDoubles) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(v)), v);
}
