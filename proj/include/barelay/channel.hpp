#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace barelay {

enum class FadingFamily { Rayleigh };

// Per-link average-SNR description of the two-hop relay network. Relay
// indices are zero-based throughout the library.
class FadingModel {
 public:
  FadingModel(double snr_ref, std::vector<double> mean_gain_sr,
              std::vector<double> mean_gain_rd,
              FadingFamily family = FadingFamily::Rayleigh);

  // All 2M links with mean gain 1 and average SNR `avg_snr`.
  static FadingModel iid(std::size_t num_relays, double avg_snr);

  std::size_t num_relays() const { return mean_gain_sr_.size(); }
  double snr_ref() const { return snr_ref_; }
  FadingFamily family() const { return family_; }
  const std::vector<double>& mean_gain_sr() const { return mean_gain_sr_; }
  const std::vector<double>& mean_gain_rd() const { return mean_gain_rd_; }

  double avg_snr_sr(std::size_t k) const { return snr_ref_ * mean_gain_sr_.at(k); }
  double avg_snr_rd(std::size_t k) const { return snr_ref_ * mean_gain_rd_.at(k); }

  // True when every link has the same average SNR.
  bool is_iid() const;

  // Same link gains at a different transmit SNR.
  FadingModel with_snr_ref(double snr_ref) const;

 private:
  double snr_ref_;
  std::vector<double> mean_gain_sr_;
  std::vector<double> mean_gain_rd_;
  FadingFamily family_;
};

struct SlotRealization {
  std::vector<double> gamma_sr;
  std::vector<double> gamma_rd;
  std::uint64_t slot_index = 0;
};

// Independent uniform streams, one per link. Link streams are derived from
// the master seed and the link's identity only, so a run with M+1 relays
// reproduces the first M relays' fading of a run with M relays.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::size_t num_relays);

  std::size_t num_relays() const { return sr_.size(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform_sr(std::size_t k) { return to_unit(sr_[k]()); }
  double uniform_rd(std::size_t k) { return to_unit(rd_[k]()); }

  std::uint64_t next_slot() { return slot_++; }

 private:
  static double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  std::vector<std::mt19937_64> sr_;
  std::vector<std::mt19937_64> rd_;
  std::uint64_t slot_ = 0;
};

// Draws one slot of instantaneous SNRs. Rayleigh power gains are exponential
// and generated by inverse CDF; the complex gain is never formed.
SlotRealization sample_slot(const FadingModel& model, RandomStream& stream);

// Same as sample_slot but reuses the caller's buffers.
void sample_slot_into(const FadingModel& model, RandomStream& stream,
                      SlotRealization& slot);

// log2(1 + snr) in bits/symbol. Throws std::domain_error for negative or
// non-finite input.
double capacity(double snr);

double db_to_linear(double db);
double linear_to_db(double linear);

}  // namespace barelay
