#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "barelay/channel.hpp"

namespace barelay {

// Five-relay i.n.d. configuration used throughout the rate, convergence and
// delay experiments.
inline const std::vector<double> kFiveRelayOmegaSr{0.5, 1.0, 1.5, 2.0, 2.5};
inline const std::vector<double> kFiveRelayOmegaRd{3.0, 1.3, 0.9, 1.1, 0.7};

FadingModel five_relay_model(double snr_db);

// Flow-balancing weights of the five-relay configuration at 0 dB, from the
// Newton solver and confirmed by long stochastic-approximation runs.
inline constexpr std::array<double, 5> kFiveRelayMuStarAt0dB{
    0.7612967769, 0.5476936779, 0.4087738712, 0.3926792104, 0.2955751524};

struct VerificationOptions {
  std::uint64_t seed = 1;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kAcceptanceCriteria = 11;

// Runs one acceptance criterion (1..kAcceptanceCriteria).
CriterionResult run_criterion(int id, const VerificationOptions& options = {});
std::vector<CriterionResult> run_acceptance_suite(const VerificationOptions& options = {});

// One line per criterion: "[PASS] 3 title (1.2 s): detail".
void print_result(std::ostream& os, const CriterionResult& result);

}  // namespace barelay
