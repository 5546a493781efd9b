// Copyright 2026 The hardfsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hardfsm/coding.hpp"
#include "hardfsm/netlist.hpp"
#include "json.hpp"

namespace hardfsm {

struct CampaignSpec {
  FaultScope scope = FaultScope::kDiffusionOnly;
  unsigned max_faults = 1;  // j
  std::vector<FaultEffect> effects{FaultEffect::kFlip};
  // Inclusive cycle window; defaults to the whole trace.
  std::optional<std::pair<std::size_t, std::size_t>> cycles;
  enum class Mode { kExhaustive, kSampled };
  Mode mode = Mode::kExhaustive;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::size_t exhaustive_bound = 10'000'000;
  unsigned threads = 1;
};

// Parameters of the closed-form estimate; taken from the hardening report.
struct DesignParams {
  std::size_t state_bits = 0;
  std::size_t error_bits = 0;  // over all blocks
  unsigned blocks = 1;
};

enum class Outcome { kMasked, kMaskedCorrupt, kDetected, kHijack };

std::string_view to_string(Outcome o);

struct ExperimentResult {
  Outcome outcome = Outcome::kMasked;
  std::size_t cycle = 0;  // state index at which the outcome was decided
  std::string expected;   // golden state at that index
  std::string reached;    // decoded faulty state ("" when not a codeword)
};

struct HijackWitness {
  std::vector<FaultSite> faults;
  ExperimentResult result;
};

struct CampaignReport {
  std::string netlist_name;
  std::string netlist_fingerprint;
  CampaignSpec spec;
  std::size_t trace_length = 0;
  std::size_t sites = 0;
  std::size_t atoms = 0;  // site x effect x cycle candidates

  std::size_t total = 0;
  std::size_t masked = 0;          // includes masked_corrupt
  std::size_t masked_corrupt = 0;  // diverged without alert, ERROR or hijack
  std::size_t detected = 0;
  std::size_t hijack = 0;
  std::vector<HijackWitness> witnesses;  // first kMaxWitnesses, enumeration order

  std::optional<DesignParams> params;
  double theoretical_p = 0;
  std::vector<std::string> warnings;

  double hijack_rate() const { return total ? static_cast<double>(hijack) / static_cast<double>(total) : 0.0; }
  std::pair<double, double> hijack_ci95() const;

  nlohmann::ordered_json to_json(const Netlist& netlist) const;
  std::string to_table(const Netlist& netlist) const;
};

inline constexpr std::size_t kMaxWitnesses = 256;

// Wilson score interval.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

// (s + E) / (k * 2^(32 - (s + E))), evaluated as written.
double theoretical_success_probability(std::size_t state_bits, std::size_t error_bits, unsigned k);

// Observation points of a hardened netlist: the state_reg-tagged flops (in
// flop order) and the fsm_alert output.
class FaultEvaluator {
 public:
  FaultEvaluator(const Netlist& netlist, const CodeBook& state_code, std::vector<InputFrame> trace);

  const Netlist& netlist() const { return sim_.netlist(); }
  const std::vector<InputFrame>& trace() const { return trace_; }
  const std::vector<std::vector<std::uint8_t>>& golden_states() const { return golden_.states; }
  // Decoded golden trajectory (trace.size() + 1 entries).
  const std::vector<std::string>& golden_trajectory() const { return golden_names_; }

  std::string decode(std::span<const std::uint8_t> flops) const;
  ExperimentResult evaluate(std::span<const FaultSite> faults, Simulator::Workspace& ws) const;
  Simulator::Workspace make_workspace() const { return sim_.make_workspace(); }

 private:
  Simulator sim_;
  const CodeBook* code_;
  std::vector<InputFrame> trace_;
  SimResult golden_;
  std::vector<std::string> golden_names_;
  std::vector<std::size_t> state_flops_;
  std::size_t alert_bit_ = 0;
};

CampaignReport run_campaign(const Netlist& netlist, std::span<const InputFrame> trace, const CampaignSpec& spec,
                            const CodeBook& state_code, std::optional<DesignParams> params = std::nullopt);

// Sampled campaign of exactly-j fault sets (j = spec.max_faults >= 2).
CampaignReport sample_multifault(const Netlist& netlist, std::span<const InputFrame> trace, const CampaignSpec& spec,
                                 const CodeBook& state_code, std::optional<DesignParams> params = std::nullopt);

}  // namespace hardfsm
