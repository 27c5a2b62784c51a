#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netobs/network.hpp"
#include "netobs/reduced.hpp"
#include "netobs/spectrum.hpp"

namespace netobs {

// Seeded random pencil instance: a line, star or random network (cycled by
// index, n in 3..8) with random unit x, y at a random lambda. Every fourth
// instance uses a real lambda and the real-eigenvalue pencil.
struct PencilCase {
  std::string family;
  int index = 0;
  int n = 0;
  Complex lambda{0.0, 0.0};
  bool real_form = false;
  PencilPair pencil;
};

PencilCase random_pencil_case(std::uint64_t seed, int index);

struct SpectrumCheck {
  bool regular = true;
  int finite = 0;
  // Distances are scaled by max(1, |eigenvalue|).
  double zero_distance = 0.0;  // smallest |e|
  // sigma_min(H - 0 D) / |H|: det(H - lambda D) vanishes at 0, regular or not.
  double h_sigma_min = 0.0;
  // Regular: 0 among the finite eigenvalues. Singular: det vanishes at 0.
  bool zero_in_spectrum(double tol) const {
    return h_sigma_min <= tol && (!regular || zero_distance <= tol);
  }
  double pairing = 0.0;        // max over e of min over e' |e + e'|
  double qz_max_imag = 0.0;    // finite QZ eigenvalues
  double qz_mismatch = 0.0;    // sorted QZ real parts vs generalized_spectrum; inf on count mismatch
};

// Finite QZ eigenvalues (|beta| > beta_tol |alpha|), ascending by real part.
std::vector<Complex> qz_finite_eigenvalues(const PencilPair& pp, double beta_tol = 1e-10);

SpectrumCheck check_spectrum(const PencilPair& pp, const SpectrumOptions& opt = {});

}  // namespace netobs
