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

#include "hardfsm/fault_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace hardfsm {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kMasked:
      return "masked";
    case Outcome::kMaskedCorrupt:
      return "masked_corrupt";
    case Outcome::kDetected:
      return "detected";
    case Outcome::kHijack:
      return "hijack";
  }
  return "?";
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  // The bounds are exact at the extremes; rounding would otherwise leave ~1e-18.
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

double theoretical_success_probability(std::size_t state_bits, std::size_t error_bits, unsigned k) {
  const double fixed = static_cast<double>(state_bits + error_bits);
  return fixed / (static_cast<double>(k) * std::exp2(32.0 - fixed));
}

std::pair<double, double> CampaignReport::hijack_ci95() const { return wilson_interval(hijack, total); }

// ---- evaluator ----------------------------------------------------------

FaultEvaluator::FaultEvaluator(const Netlist& netlist, const CodeBook& state_code, std::vector<InputFrame> trace)
    : sim_(netlist), code_(&state_code), trace_(std::move(trace)) {
  const auto& flops = netlist.flops();
  for (std::size_t i = 0; i < flops.size(); ++i) {
    if (flops[i].tag == StageTag::kStateReg) state_flops_.push_back(i);
  }
  if (state_flops_.empty()) throw Error("netlist has no state_reg-tagged flops; was it produced by harden?");
  if (state_flops_.size() != state_code.width()) {
    throw Error("netlist state register has " + std::to_string(state_flops_.size()) + " bits, codebook expects " +
                std::to_string(state_code.width()));
  }
  std::size_t offset = 0;
  bool found = false;
  for (const auto& p : netlist.outputs()) {
    if (p.name == "fsm_alert") {
      alert_bit_ = offset;
      found = true;
    }
    offset += p.bits.size();
  }
  if (!found) throw Error("netlist has no fsm_alert output");
  if (trace_.empty()) throw Error("fault campaign needs a non-empty input trace");
  golden_ = sim_.run(trace_);
  for (const auto& s : golden_.states) golden_names_.push_back(decode(s));
  for (std::size_t t = 0; t < golden_.outputs.size(); ++t) {
    if (golden_.outputs[t][alert_bit_]) {
      throw Error("golden run raises fsm_alert in cycle " + std::to_string(t) + "; the design or trace is broken");
    }
  }
  for (std::size_t t = 0; t < golden_names_.size(); ++t) {
    if (golden_names_[t].empty() || golden_names_[t] == code_->error_symbol()) {
      throw Error("golden run leaves the valid state set at cycle " + std::to_string(t));
    }
  }
}

std::string FaultEvaluator::decode(std::span<const std::uint8_t> flops) const {
  BitVector w(state_flops_.size());
  for (std::size_t i = 0; i < state_flops_.size(); ++i) w.set(i, flops[state_flops_[i]]);
  const auto idx = code_->find(w);
  return idx ? code_->entries()[*idx].first : std::string();
}

ExperimentResult FaultEvaluator::evaluate(std::span<const FaultSite> faults, Simulator::Workspace& ws) const {
  const std::size_t T = trace_.size();
  std::size_t first = T;
  std::size_t last_transient = 0;
  bool permanent = false;
  for (const auto& f : faults) {
    const std::size_t c = f.cycle.value_or(0);
    first = std::min(first, c);
    if (f.effect == FaultEffect::kFlip && f.cycle) {
      last_transient = std::max(last_transient, c);
    } else {
      permanent = true;
    }
  }
  ExperimentResult r;
  if (first >= T) return r;

  std::vector<std::uint8_t> state = golden_.states[first];
  std::vector<std::uint8_t> outputs;
  std::vector<std::uint8_t> next;
  bool diverged = false;
  // Cycle T re-applies the last frame only to observe the alert of the final state.
  for (std::size_t t = first; t <= T; ++t) {
    sim_.step(ws, state, trace_[std::min(t, T - 1)], faults, t, outputs, next);
    const bool same = state == golden_.states[t];
    if (outputs[alert_bit_]) {
      r.outcome = Outcome::kDetected;
      r.cycle = t;
      r.expected = golden_names_[t];
      r.reached = decode(state);
      return r;
    }
    if (!same) {
      diverged = true;
      const std::string name = decode(state);
      if (!name.empty() && name != golden_names_[t]) {
        r.outcome = name == code_->error_symbol() ? Outcome::kDetected : Outcome::kHijack;
        r.cycle = t;
        r.expected = golden_names_[t];
        r.reached = name;
        return r;
      }
    }
    if (t == T) break;
    state.swap(next);
    // Fault-free from here on and back on the golden path: nothing can change.
    if (!permanent && t >= last_transient && state == golden_.states[t + 1]) break;
  }
  r.outcome = diverged ? Outcome::kMaskedCorrupt : Outcome::kMasked;
  return r;
}

// ---- campaigns ------------------------------------------------------------

namespace {

struct Atom {
  NetId net;
  FaultEffect effect;
  std::size_t cycle;
};

void check_effects(const CampaignSpec& spec) {
  if (spec.effects.empty()) throw Error("campaign needs at least one fault effect");
  if (spec.max_faults < 1) throw Error("max faults must be at least 1");
}

// Counts j-subsets without exceeding `cap`.
double choose(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  double r = 1;
  for (std::size_t i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

class Runner {
 public:
  Runner(const FaultEvaluator& ev, const std::vector<Atom>& atoms, unsigned threads)
      : ev_(ev), atoms_(atoms), threads_(std::max(1u, threads)) {}

  // Experiments are flat runs of `width` atom indices; unused slots hold npos.
  void run_batch(const std::vector<std::size_t>& flat, std::size_t width, CampaignReport& report) {
    const std::size_t count = flat.size() / width;
    std::vector<ExperimentResult> results(count);
    auto work = [&](std::size_t begin, std::size_t end) {
      auto ws = ev_.make_workspace();
      std::vector<FaultSite> faults;
      for (std::size_t e = begin; e < end; ++e) {
        faults.clear();
        for (std::size_t k = 0; k < width; ++k) {
          const std::size_t a = flat[e * width + k];
          if (a == npos) continue;
          faults.push_back({atoms_[a].net, atoms_[a].effect, atoms_[a].cycle});
        }
        results[e] = ev_.evaluate(faults, ws);
      }
    };
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads_, count));
    if (n <= 1) {
      work(0, count);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (count + n - 1) / n;
      for (unsigned i = 0; i < n; ++i) {
        const std::size_t b = i * chunk;
        const std::size_t e = std::min(count, b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t e = 0; e < count; ++e) {
      const auto& r = results[e];
      ++report.total;
      switch (r.outcome) {
        case Outcome::kMasked:
          ++report.masked;
          break;
        case Outcome::kMaskedCorrupt:
          ++report.masked;
          ++report.masked_corrupt;
          break;
        case Outcome::kDetected:
          ++report.detected;
          break;
        case Outcome::kHijack:
          ++report.hijack;
          if (report.witnesses.size() < kMaxWitnesses) {
            HijackWitness w;
            for (std::size_t k = 0; k < width; ++k) {
              const std::size_t a = flat[e * width + k];
              if (a != npos) w.faults.push_back({atoms_[a].net, atoms_[a].effect, atoms_[a].cycle});
            }
            w.result = r;
            report.witnesses.push_back(std::move(w));
          }
          break;
      }
    }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  const FaultEvaluator& ev_;
  const std::vector<Atom>& atoms_;
  unsigned threads_;
};

constexpr std::size_t kBatch = 1 << 14;

CampaignReport campaign(const Netlist& netlist, std::span<const InputFrame> trace, const CampaignSpec& spec,
                        const CodeBook& state_code, std::optional<DesignParams> params) {
  check_effects(spec);
  FaultEvaluator ev(netlist, state_code, std::vector<InputFrame>(trace.begin(), trace.end()));
  const std::size_t T = trace.size();
  std::size_t c0 = 0;
  std::size_t c1 = T - 1;
  if (spec.cycles) {
    c0 = spec.cycles->first;
    c1 = std::min(spec.cycles->second, T - 1);
    if (c0 > c1) throw Error("empty fault cycle window");
  }
  const auto sites = enumerate_fault_sites(netlist, spec.scope);
  std::vector<Atom> atoms;
  for (auto s : sites) {
    for (auto e : spec.effects) {
      for (std::size_t c = c0; c <= c1; ++c) atoms.push_back({s, e, c});
    }
  }

  CampaignReport report;
  report.netlist_name = netlist.name();
  report.netlist_fingerprint = BitVector::from_uint(fingerprint(netlist.to_json().dump()), 64).to_hex();
  report.spec = spec;
  report.trace_length = T;
  report.sites = sites.size();
  report.atoms = atoms.size();
  report.params = params;
  if (params) {
    report.theoretical_p = theoretical_success_probability(params->state_bits, params->error_bits, params->blocks);
    if (params->state_bits + params->error_bits >= 32 || report.theoretical_p >= 1.0) {
      std::ostringstream w;
      w << "closed-form estimate degenerates for " << params->state_bits + params->error_bits
        << " fixed bits; reported as computed";
      report.warnings.push_back(w.str());
    }
  }
  if (atoms.empty()) {
    report.warnings.push_back("scope has no fault sites");
    return report;
  }

  Runner runner(ev, atoms, spec.threads);
  const std::size_t j = spec.max_faults;
  std::vector<std::size_t> flat;
  auto same_slot = [&](std::size_t a, std::size_t b) {
    return atoms[a].net == atoms[b].net && atoms[a].cycle == atoms[b].cycle;
  };

  if (spec.mode == CampaignSpec::Mode::kExhaustive) {
    double bound = 0;
    for (std::size_t m = 1; m <= j; ++m) bound += choose(atoms.size(), m);
    if (bound > static_cast<double>(spec.exhaustive_bound)) {
      std::ostringstream msg;
      msg << "exhaustive campaign would run up to " << std::setprecision(4) << bound << " experiments (bound "
          << spec.exhaustive_bound << "); use sampling";
      throw Error(msg.str());
    }
    // Every fault set of size 1..j, smallest first, lexicographic within a size.
    for (std::size_t m = 1; m <= j && m <= atoms.size(); ++m) {
      std::vector<std::size_t> idx(m);
      for (std::size_t i = 0; i < m; ++i) idx[i] = i;
      for (;;) {
        bool clash = false;
        for (std::size_t a = 0; a < m && !clash; ++a) {
          for (std::size_t b = a + 1; b < m && !clash; ++b) clash = same_slot(idx[a], idx[b]);
        }
        if (!clash) {
          for (std::size_t i = 0; i < j; ++i) flat.push_back(i < m ? idx[i] : Runner::npos);
          if (flat.size() >= kBatch * j) {
            runner.run_batch(flat, j, report);
            flat.clear();
          }
        }
        std::size_t i = m;
        while (i > 0 && idx[i - 1] == atoms.size() - m + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t k = i; k < m; ++k) idx[k] = idx[k - 1] + 1;
      }
    }
  } else {
    if (j > atoms.size()) throw Error("fewer fault candidates than faults per experiment");
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
    for (std::size_t s = 0; s < spec.samples; ++s) {
      std::vector<std::size_t> chosen;
      std::size_t attempts = 0;
      while (chosen.size() < j) {
        if (++attempts > 1000 * j) throw Error("cannot draw distinct fault slots; widen the scope or cycle window");
        const std::size_t a = pick(rng);
        bool clash = false;
        for (auto c : chosen) clash = clash || c == a || same_slot(a, c);
        if (!clash) chosen.push_back(a);
      }
      std::sort(chosen.begin(), chosen.end());
      flat.insert(flat.end(), chosen.begin(), chosen.end());
      if (flat.size() >= kBatch * j) {
        runner.run_batch(flat, j, report);
        flat.clear();
      }
    }
  }
  if (!flat.empty()) runner.run_batch(flat, j, report);
  return report;
}

}  // namespace

CampaignReport run_campaign(const Netlist& netlist, std::span<const InputFrame> trace, const CampaignSpec& spec,
                            const CodeBook& state_code, std::optional<DesignParams> params) {
  return campaign(netlist, trace, spec, state_code, params);
}

CampaignReport sample_multifault(const Netlist& netlist, std::span<const InputFrame> trace, const CampaignSpec& spec,
                                 const CodeBook& state_code, std::optional<DesignParams> params) {
  if (spec.mode != CampaignSpec::Mode::kSampled) throw Error("multi-fault campaigns must be sampled");
  if (spec.max_faults < 2) throw Error("multi-fault sampling needs at least two faults per experiment");
  return campaign(netlist, trace, spec, state_code, params);
}

// ---- reporting ----------------------------------------------------------

namespace {

nlohmann::ordered_json fault_json(const Netlist& n, const FaultSite& f) {
  nlohmann::ordered_json j;
  j["net"] = n.net_name(f.net);
  j["effect"] = std::string(to_string(f.effect));
  if (f.cycle) {
    j["cycle"] = *f.cycle;
  } else {
    j["cycle"] = nullptr;
  }
  return j;
}

std::string rate(double r) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << 100.0 * r << "%";
  return s.str();
}

}  // namespace

nlohmann::ordered_json CampaignReport::to_json(const Netlist& netlist) const {
  nlohmann::ordered_json j;
  j["netlist"] = netlist_name;
  j["netlist_fingerprint"] = netlist_fingerprint;
  nlohmann::ordered_json c;
  c["scope"] = std::string(to_string(spec.scope));
  nlohmann::ordered_json effects = nlohmann::ordered_json::array();
  for (auto e : spec.effects) effects.push_back(std::string(to_string(e)));
  c["effects"] = effects;
  c["max_faults"] = spec.max_faults;
  c["mode"] = spec.mode == CampaignSpec::Mode::kExhaustive ? "exhaustive" : "sampled";
  if (spec.mode == CampaignSpec::Mode::kSampled) {
    c["samples"] = spec.samples;
    c["seed"] = spec.seed;
  }
  if (spec.cycles) {
    c["cycles"] = {spec.cycles->first, std::min(spec.cycles->second, trace_length ? trace_length - 1 : 0)};
  } else {
    c["cycles"] = {0, trace_length ? trace_length - 1 : 0};
  }
  c["trace_length"] = trace_length;
  c["sites"] = sites;
  c["candidates"] = atoms;
  j["campaign"] = c;

  nlohmann::ordered_json r;
  r["total"] = total;
  r["masked"] = masked;
  r["masked_corrupt"] = masked_corrupt;
  r["detected"] = detected;
  r["hijack"] = hijack;
  r["hijack_rate"] = hijack_rate();
  const auto [lo, hi] = hijack_ci95();
  r["hijack_rate_ci95"] = {lo, hi};
  j["results"] = r;

  nlohmann::ordered_json t;
  if (params) {
    t["state_bits"] = params->state_bits;
    t["error_bits"] = params->error_bits;
    t["blocks"] = params->blocks;
    t["p"] = theoretical_p;
  } else {
    t = nullptr;
  }
  j["theoretical"] = t;

  nlohmann::ordered_json ws = nlohmann::ordered_json::array();
  for (const auto& w : witnesses) {
    nlohmann::ordered_json wj;
    nlohmann::ordered_json fs = nlohmann::ordered_json::array();
    for (const auto& f : w.faults) fs.push_back(fault_json(netlist, f));
    wj["faults"] = fs;
    wj["cycle"] = w.result.cycle;
    wj["expected"] = w.result.expected;
    wj["reached"] = w.result.reached;
    ws.push_back(wj);
  }
  j["witnesses"] = ws;
  j["witnesses_truncated"] = hijack > witnesses.size();
  j["warnings"] = warnings;
  return j;
}

std::string CampaignReport::to_table(const Netlist& netlist) const {
  std::ostringstream o;
  o << "netlist      " << netlist_name << " (" << netlist_fingerprint << ")\n";
  o << "scope        " << to_string(spec.scope) << ", " << sites << " sites, " << atoms << " candidates, "
    << (spec.mode == CampaignSpec::Mode::kExhaustive ? "exhaustive" : "sampled") << ", up to " << spec.max_faults
    << " fault(s)\n";
  auto row = [&](const char* name, std::size_t n) {
    o << std::left << std::setw(15) << name << std::right << std::setw(10) << n << "  "
      << rate(total ? static_cast<double>(n) / static_cast<double>(total) : 0.0) << "\n";
  };
  row("masked", masked);
  row("  corrupt", masked_corrupt);
  row("detected", detected);
  row("hijack", hijack);
  o << std::left << std::setw(15) << "total" << std::right << std::setw(10) << total << "\n";
  const auto [lo, hi] = hijack_ci95();
  o << "hijack 95% CI [" << rate(lo) << ", " << rate(hi) << "]\n";
  if (params) o << "closed-form P " << std::scientific << std::setprecision(3) << theoretical_p << "\n";
  for (std::size_t i = 0; i < witnesses.size() && i < 10; ++i) {
    const auto& w = witnesses[i];
    o << "witness " << i << ":";
    for (const auto& f : w.faults) {
      o << " " << to_string(f.effect) << "@" << netlist.net_name(f.net) << "#" << f.cycle.value_or(0);
    }
    o << " -> " << w.result.reached << " instead of " << w.result.expected << " at state " << w.result.cycle << "\n";
  }
  if (witnesses.size() > 10) o << "(" << witnesses.size() - 10 << " more witnesses in the JSON report)\n";
  for (const auto& w : warnings) o << "warning: " << w << "\n";
  return o.str();
}

}  // namespace hardfsm
