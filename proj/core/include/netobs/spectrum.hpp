#pragma once

#include <cstdint>
#include <vector>

#include "netobs/reduced.hpp"

namespace netobs {

struct PencilSpectrum {
  // Finite generalized eigenvalues, ascending.
  std::vector<double> eigenvalues;
  // det(H - lambda D) not identically zero, judged from nonreal probes.
  bool regular = true;
  // dim(Ker H intersected with Ker D).
  int common_kernel_dim = 0;
  // Pencil size minus number of finite eigenvalues.
  int infinite_count = 0;
  // Smallest relative singular value of H - lambda D over the probes.
  double probe_min = 0.0;
};

struct SpectrumOptions {
  double d_tol = 1e-12;     // relative, for Ker D
  double rank_tol = 1e-10;  // relative, for the kernel of H restricted to Ker D
  double probe_tol = 1e-12;
  int probes = 3;
  std::uint64_t probe_seed = 0x6a09e667f3bcc909ULL;
};

// Finite spectrum of the symmetric pencil (H, D) with D positive semidefinite.
// The common kernel is deflated first, so a singular pencil still returns the
// eigenvalues of its regular part.
PencilSpectrum generalized_spectrum(const PencilPair& pp, const SpectrumOptions& opt = {});

// Smallest eigenvalue greater than `floor` (relative to the spectral scale); NaN if none.
double smallest_positive(const PencilSpectrum& spec, double rel_floor = 1e-9);

}  // namespace netobs
