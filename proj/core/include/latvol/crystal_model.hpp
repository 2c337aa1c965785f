#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "latvol/lattice_geometry.hpp"

namespace latvol {

struct CrystalBasis {
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();

  static CrystalBasis fcc();
  Eigen::Vector3d physical(IntVec3 x) const {
    return A * Eigen::Vector3d(double(x.x), double(x.y), double(x.z));
  }
};

// All r != 0 with |A r| <= cutoff, sorted; symmetric under r -> -r.
std::vector<IntVec3> neighbor_set(const CrystalBasis& basis, double cutoff);

// First nonzero component positive.
bool is_canonical(IntVec3 r);
std::vector<IntVec3> canonical_half(const std::vector<IntVec3>& directions);

// Cube coordinates of the FCC lattice: tau = 2 t = G x with
// G = [[0,1,1],[1,0,1],[1,1,0]], so that A x = sqrt(2) t. Lattice points are
// exactly the integer tau with even component sum.
std::array<std::int64_t, 3> to_tau(IntVec3 x);
IntVec3 from_tau(const std::array<std::int64_t, 3>& tau);
std::int64_t tau_norm(IntVec3 x);

enum class SiteKind : std::uint8_t { Atomistic, Continuum, Dirichlet };

struct ProblemConfig {
  int N = 4;
  int K = 2;
  bool vacancy = true;
  // Width (in cube units) of the fully refined shell around the atomistic cube.
  int fine_width = 2;
  double cutoff = 3.2;

  bool operator==(const ProblemConfig&) const = default;
};

// Sites of the cube problem. The physical cube of side 2 sqrt(2) N is
// |tau|_inf <= 2N; free sites have |tau|_inf < 2N, atomistic ones
// |tau|_inf < 2K. Dirichlet sites fill the shell 2N <= |tau|_inf <= 2N + 4,
// which is wide enough that no bond from outside it reaches the closed cube.
struct DomainDecomposition {
  int N = 0;
  int K = 0;
  bool vacancy = false;
  int tau_extent = 0;
  std::vector<IntVec3> sites;
  std::vector<SiteKind> kind;

  // Index of x in sites, or -1.
  int find(IntVec3 x) const;
  std::size_t count(SiteKind k) const;
  std::size_t free_count() const { return count(SiteKind::Atomistic) + count(SiteKind::Continuum); }

  std::vector<int> lookup;  // dense over the tau box
};

struct Mesh {
  std::vector<IntVec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<int> vertex_site;
  // Breakpoints of the tensor grid in cube units, shared by all three axes.
  std::vector<int> grid;
  // Tets of grid box (i, j, k) are tets[box_first[b] .. box_first[b + 1]).
  std::vector<int> box_first;

  LatticeTet tet(std::size_t t) const;
  int box_index(int i, int j, int k) const;
  std::size_t num_intervals() const { return grid.empty() ? 0 : grid.size() - 1; }
};

struct Bond {
  int i;
  int j;
  int dir;
};

// B with each undirected bond stored once as (x, x + r), r canonical.
struct BondSets {
  std::vector<Bond> bonds;
  std::vector<std::uint8_t> continuum;

  std::size_t count_continuum() const;
  std::size_t count_atomistic() const { return bonds.size() - count_continuum(); }
};

struct EffectiveVolumes {
  int num_dirs = 0;
  std::vector<double> omega;

  double operator()(std::size_t tet, int dir) const { return omega[tet * num_dirs + dir]; }
  double& operator()(std::size_t tet, int dir) { return omega[tet * num_dirs + dir]; }
};

// Site value as a combination of primary sites (atomistic sites, mesh
// vertices or Dirichlet sites).
struct SiteRep {
  std::array<int, 4> site{};
  std::array<double, 4> weight{};
  int n = 0;
};

struct CoupledModel {
  ProblemConfig config;
  CrystalBasis basis;
  std::vector<IntVec3> directions;
  DomainDecomposition domain;
  Mesh mesh;
  BondSets bonds;
  EffectiveVolumes omega;

  std::vector<int> site_dof;
  std::vector<int> dof_site;
  std::vector<SiteRep> site_rep;
  bool cauchy_born = false;

  int num_dofs() const { return static_cast<int>(dof_site.size()); }
};

// Geometry only. Requires 2 <= K <= N; K == N gives a purely atomistic
// problem without a mesh.
DomainDecomposition build_domain(const ProblemConfig& cfg);
Mesh build_mesh(const ProblemConfig& cfg, const DomainDecomposition& dd);

// Requires 2 <= K < N.
std::pair<DomainDecomposition, Mesh> build_vacancy_problem(int N, int K, const CrystalBasis& basis);

// Open segment (a, b) inside the open continuum region.
bool segment_in_continuum(const DomainDecomposition& dd, IntVec3 a, IntVec3 b);

BondSets classify_bonds(const DomainDecomposition& dd, const Mesh& mesh,
                        const std::vector<IntVec3>& directions);

// directions must be canonical (one of each +-r pair).
EffectiveVolumes effective_volumes(const BondSets& bonds, const Mesh& mesh,
                                   const std::vector<IntVec3>& directions,
                                   const DomainDecomposition& dd);

// Plain Cauchy-Born weights: Omega_{T,r} = |T| in lattice units.
EffectiveVolumes cauchy_born_volumes(const Mesh& mesh, int num_dirs);

// Full model: geometry, bonds, effective volumes and degrees of freedom.
CoupledModel build_model(const ProblemConfig& cfg, const CrystalBasis& basis = CrystalBasis::fcc(),
                         bool cauchy_born = false);

// Mesh grading and counts, for output metadata.
std::string describe(const CoupledModel& model);

}  // namespace latvol
