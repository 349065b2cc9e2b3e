#include "barelay/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace barelay {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 link_engine(std::uint64_t seed, std::uint64_t link_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(splitmix64(link_id)),
                    static_cast<std::uint32_t>(link_id)};
  return std::mt19937_64(seq);
}

void check_gains(const std::vector<double>& gains, const char* name) {
  for (std::size_t k = 0; k < gains.size(); ++k) {
    if (!(gains[k] > 0.0) || !std::isfinite(gains[k]))
      throw std::invalid_argument(std::string(name) + "[" + std::to_string(k) +
                                  "] must be a positive finite mean gain");
  }
}

}  // namespace

FadingModel::FadingModel(double snr_ref, std::vector<double> mean_gain_sr,
                         std::vector<double> mean_gain_rd, FadingFamily family)
    : snr_ref_(snr_ref),
      mean_gain_sr_(std::move(mean_gain_sr)),
      mean_gain_rd_(std::move(mean_gain_rd)),
      family_(family) {
  if (mean_gain_sr_.empty())
    throw std::invalid_argument("fading model needs at least one relay");
  if (mean_gain_sr_.size() != mean_gain_rd_.size())
    throw std::invalid_argument(
        "source-relay and relay-destination gain vectors differ in length");
  if (!(snr_ref_ > 0.0) || !std::isfinite(snr_ref_))
    throw std::invalid_argument("snr_ref must be positive and finite");
  check_gains(mean_gain_sr_, "mean_gain_sr");
  check_gains(mean_gain_rd_, "mean_gain_rd");
}

FadingModel FadingModel::iid(std::size_t num_relays, double avg_snr) {
  return FadingModel(avg_snr, std::vector<double>(num_relays, 1.0),
                     std::vector<double>(num_relays, 1.0));
}

bool FadingModel::is_iid() const {
  const double ref = mean_gain_sr_.front();
  auto same = [ref](double g) { return g == ref; };
  return std::all_of(mean_gain_sr_.begin(), mean_gain_sr_.end(), same) &&
         std::all_of(mean_gain_rd_.begin(), mean_gain_rd_.end(), same);
}

FadingModel FadingModel::with_snr_ref(double snr_ref) const {
  return FadingModel(snr_ref, mean_gain_sr_, mean_gain_rd_, family_);
}

RandomStream::RandomStream(std::uint64_t seed, std::size_t num_relays) {
  sr_.reserve(num_relays);
  rd_.reserve(num_relays);
  for (std::size_t k = 0; k < num_relays; ++k) {
    sr_.push_back(link_engine(seed, 2 * k));
    rd_.push_back(link_engine(seed, 2 * k + 1));
  }
}

void sample_slot_into(const FadingModel& model, RandomStream& stream,
                      SlotRealization& slot) {
  const std::size_t m = model.num_relays();
  if (stream.num_relays() < m)
    throw std::invalid_argument("random stream has fewer links than the model");
  slot.gamma_sr.resize(m);
  slot.gamma_rd.resize(m);
  slot.slot_index = stream.next_slot();
  // -mean * log(1 - u) with u in [0, 1) is finite and nonnegative.
  for (std::size_t k = 0; k < m; ++k) {
    slot.gamma_sr[k] = -model.avg_snr_sr(k) * std::log1p(-stream.uniform_sr(k));
    slot.gamma_rd[k] = -model.avg_snr_rd(k) * std::log1p(-stream.uniform_rd(k));
  }
}

SlotRealization sample_slot(const FadingModel& model, RandomStream& stream) {
  SlotRealization slot;
  sample_slot_into(model, stream, slot);
  return slot;
}

double capacity(double snr) {
  if (!(snr >= 0.0) || !std::isfinite(snr))
    throw std::domain_error("capacity: SNR must be finite and nonnegative");
  return std::log2(1.0 + snr);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace barelay
