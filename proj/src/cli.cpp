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

#include "hardfsm/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hardfsm/fault_engine.hpp"
#include "hardfsm/hardening.hpp"
#include "hardfsm/verilog.hpp"

namespace hardfsm {

namespace fs = std::filesystem;

namespace {

class IoError : public Error {
 public:
  using Error::Error;
};

enum class LogLevel { kQuiet, kInfo, kDebug };

LogLevel log_level() {
  const char* v = std::getenv("HARDFSM_LOG");
  if (!v) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "quiet" || s == "0" || s == "error") return LogLevel::kQuiet;
  if (s == "debug" || s == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err), level_(log_level()) {}
  void info(const std::string& msg) const {
    if (level_ >= LogLevel::kInfo) err_ << msg << "\n";
  }
  void debug(const std::string& msg) const {
    if (level_ >= LogLevel::kDebug) err_ << "debug: " << msg << "\n";
  }

 private:
  std::ostream& err_;
  LogLevel level_;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + p.string() + "' failed");
}

nlohmann::ordered_json read_json(const fs::path& p) {
  const std::string text = read_file(p);
  try {
    return nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(p.string() + ": " + e.what());
  }
}

FsmSpec read_fsm(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("FSM file '" + p.string() + "' does not exist");
  return load_fsm(p);
}

std::vector<Assignment> read_trace(const fs::path& p) {
  const auto j = read_json(p);
  if (!j.is_array()) throw Error(p.string() + ": trace must be a JSON array of {signal: value} objects");
  std::vector<Assignment> trace;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_object()) throw Error(p.string() + ": step " + std::to_string(i) + " is not an object");
    Assignment a;
    for (const auto& [k, v] : j[i].items()) {
      if (!v.is_number_unsigned()) {
        throw Error(p.string() + ": step " + std::to_string(i) + ": value of '" + k + "' is not a non-negative integer");
      }
      a[k] = v.get<std::uint64_t>();
    }
    trace.push_back(std::move(a));
  }
  return trace;
}

std::string decode_word(const CodeBook& code, const std::vector<std::uint8_t>& bits) {
  BitVector w(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) w.set(i, bits[i]);
  const auto idx = code.find(w);
  return idx ? code.entries()[*idx].first : "?" + w.to_hex();
}

// Random-trace comparison of the hardened netlist against the specification.
std::optional<std::string> self_check(const HardenedDesign& d, std::uint64_t seed, std::size_t traces) {
  Simulator sim(d.netlist);
  const auto& state_port = d.netlist.output("state_e");
  std::size_t alert_offset = 0;
  for (const auto& p : d.netlist.outputs()) {
    if (p.name == "fsm_alert") break;
    alert_offset += p.bits.size();
  }
  for (std::size_t t = 0; t < traces; ++t) {
    const auto trace = random_trace(d.fsm, 1 + mix_seed(seed, t) % 64, mix_seed(seed, 1000 + t));
    const auto spec = simulate_spec(d.fsm, trace);
    const auto res = sim.run(encode_trace(d.codes, trace));
    for (std::size_t c = 0; c < spec.size(); ++c) {
      std::vector<std::uint8_t> bits;
      for (std::size_t i = 0; i < state_port.bits.size(); ++i) bits.push_back(res.states[c][i]);
      const auto got = decode_word(d.codes.state, bits);
      if (got != spec[c]) {
        return "trace " + std::to_string(t) + " cycle " + std::to_string(c) + ": netlist in " + got +
               ", specification in " + spec[c];
      }
      if (c < res.outputs.size() && res.outputs[c][alert_offset]) {
        return "trace " + std::to_string(t) + " cycle " + std::to_string(c) + ": fsm_alert raised";
      }
    }
  }
  return std::nullopt;
}

struct HardenArgs {
  std::string fsm;
  unsigned level = 0;
  std::uint64_t seed = 1;
  std::optional<unsigned> error_bits;
  bool encoded_selectors = false;
  unsigned blocks = 0;
  std::string out;
};

int cmd_harden(const HardenArgs& a, std::ostream& out, const Log& log) {
  if (a.level < 2) {
    throw Error("--level " + std::to_string(a.level) +
                " gives codewords no redundancy, so no fault could be detected; use --level 2 or higher");
  }
  const FsmSpec fsm = read_fsm(a.fsm);
  for (const auto& w : fsm.warnings) log.info("warning: " + w);
  HardeningConfig cfg;
  cfg.protection_level = a.level;
  cfg.seed = a.seed;
  cfg.error_bits = a.error_bits;
  cfg.encoded_mux_selectors = a.encoded_selectors;
  cfg.block_count = a.blocks;
  const HardenedDesign d = harden(fsm, cfg);
  log.debug("netlist has " + std::to_string(d.netlist.gates().size()) + " gates");
  if (auto problem = self_check(d, a.seed, 100)) throw Error("bisimulation self-check failed: " + *problem);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create output directory '" + a.out + "': " + ec.message());
  const fs::path dir(a.out);
  write_file(dir / "netlist.json", d.netlist.to_json().dump(1) + "\n");
  write_file(dir / "netlist.v", emit_verilog(d.netlist));
  write_file(dir / "codebook.json", d.codes.to_json().dump(1) + "\n");
  write_file(dir / "hardening_report.json", d.report().dump(1) + "\n");
  write_file(dir / "fsm.json", to_json(d.fsm).dump(1) + "\n");
  const auto counts = gate_counts(d.netlist);
  out << "hardened " << fsm.name << ": N=" << cfg.protection_level << " k=" << d.layout.block_count
      << " e=" << d.layout.error_bits << " state=" << d.codes.state.width() << "b control="
      << d.codes.control_width() << "b modifier=" << d.layout.modifier_width() << "b, "
      << counts["total"].get<std::size_t>() << " gates, " << d.plans.size() << " transition plans -> " << a.out
      << "\n";
  return kExitOk;
}

struct InjectArgs {
  std::string netlist;
  std::string scope = "diffusion";
  std::string effects = "flip";
  unsigned max_faults = 1;
  bool exhaustive = false;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 1;
  std::string trace = "auto-cover";
  std::string codebook;
  std::string fsm;
  std::string design_report;
  std::string out;
  std::string cycles;
  unsigned threads = 1;
  std::size_t bound = 10'000'000;
};

std::vector<FaultEffect> parse_effects(const std::string& list) {
  std::vector<FaultEffect> effects;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto e = fault_effect_from_string(item);
    if (std::find(effects.begin(), effects.end(), e) == effects.end()) effects.push_back(e);
  }
  if (effects.empty()) throw Error("--effects needs at least one of flip, stuck0, stuck1");
  return effects;
}

int cmd_inject(const InjectArgs& a, std::ostream& out, const Log& log) {
  const fs::path net_path(a.netlist);
  const fs::path dir = net_path.parent_path();
  const Netlist netlist = Netlist::from_json(read_json(net_path));
  bool tagged = false;
  for (const auto& g : netlist.gates()) tagged = tagged || g.tag != StageTag::kNone;
  if (!tagged) throw Error("netlist carries no stage tags; inject needs a netlist produced by harden");

  const CodeBooks codes =
      CodeBooks::from_json(read_json(a.codebook.empty() ? dir / "codebook.json" : fs::path(a.codebook)));

  std::vector<Assignment> trace;
  if (a.trace == "auto-cover") {
    const fs::path fsm_path = a.fsm.empty() ? dir / "fsm.json" : fs::path(a.fsm);
    trace = cover_trace(read_fsm(fsm_path));
    log.debug("edge-covering trace of " + std::to_string(trace.size()) + " steps");
  } else {
    trace = read_trace(a.trace);
  }
  const auto frames = encode_trace(codes, trace);

  CampaignSpec spec;
  spec.scope = fault_scope_from_string(a.scope);
  spec.effects = parse_effects(a.effects);
  spec.max_faults = a.max_faults;
  spec.threads = a.threads;
  spec.exhaustive_bound = a.bound;
  spec.seed = a.seed;
  if (a.exhaustive == a.sample.has_value()) throw Error("choose exactly one of --exhaustive and --sample COUNT");
  if (a.sample) {
    spec.mode = CampaignSpec::Mode::kSampled;
    spec.samples = *a.sample;
  }
  if (!a.cycles.empty()) {
    const auto colon = a.cycles.find(':');
    try {
      if (colon == std::string::npos) {
        const std::size_t c = std::stoul(a.cycles);
        spec.cycles = {c, c};
      } else {
        spec.cycles = {std::stoul(a.cycles.substr(0, colon)), std::stoul(a.cycles.substr(colon + 1))};
      }
    } catch (const std::exception&) {
      throw Error("--cycles expects FIRST:LAST or CYCLE");
    }
  }

  std::optional<DesignParams> params;
  const fs::path report_path = a.design_report.empty() ? dir / "hardening_report.json" : fs::path(a.design_report);
  if (fs::exists(report_path)) {
    const auto r = read_json(report_path);
    try {
      params = DesignParams{r.at("widths").at("state").get<std::size_t>(),
                            r.at("widths").at("error_total").get<std::size_t>(),
                            r.at("block_count").get<unsigned>()};
    } catch (const nlohmann::json::exception&) {
      log.info("warning: " + report_path.string() + " lacks widths; closed-form estimate omitted");
    }
  }

  const CampaignReport report = run_campaign(netlist, frames, spec, codes.state, params);
  const fs::path out_path = a.out.empty() ? dir / "report.json" : fs::path(a.out);
  write_file(out_path, report.to_json(netlist).dump(1) + "\n");
  out << report.to_table(netlist);
  if (report.hijack > 0) {
    log.info(std::to_string(report.hijack) + " hijack(s) within a budget of " + std::to_string(spec.max_faults) +
             " fault(s)");
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_simulate(const std::string& target, const std::string& trace_file, const std::string& codebook,
                 std::ostream& out) {
  const fs::path path(target);
  const auto trace = read_trace(trace_file);
  nlohmann::ordered_json result;
  std::optional<nlohmann::ordered_json> as_json;
  if (path.extension() == ".json") as_json = read_json(path);
  if (as_json && as_json->is_object() && as_json->contains("gates")) {
    const Netlist netlist = Netlist::from_json(*as_json);
    const CodeBooks codes =
        CodeBooks::from_json(read_json(codebook.empty() ? path.parent_path() / "codebook.json" : fs::path(codebook)));
    const auto frames = encode_trace(codes, trace);
    const SimResult sim = Simulator(netlist).run(frames);
    std::vector<std::size_t> state_flops;
    for (std::size_t i = 0; i < netlist.flops().size(); ++i) {
      if (netlist.flops()[i].tag == StageTag::kStateReg) state_flops.push_back(i);
    }
    nlohmann::ordered_json states = nlohmann::ordered_json::array();
    for (const auto& s : sim.states) {
      std::vector<std::uint8_t> bits;
      for (auto f : state_flops) bits.push_back(s[f]);
      states.push_back(decode_word(codes.state, bits));
    }
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    nlohmann::ordered_json alerts = nlohmann::ordered_json::array();
    for (const auto& o : sim.outputs) {
      nlohmann::ordered_json cycle = nlohmann::ordered_json::object();
      std::size_t offset = 0;
      for (const auto& p : netlist.outputs()) {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < p.bits.size() && i < 64; ++i) v |= static_cast<std::uint64_t>(o[offset + i]) << i;
        offset += p.bits.size();
        if (p.name == "fsm_alert") {
          alerts.push_back(v);
        } else if (p.name != "state_e") {
          cycle[p.name] = v;
        }
      }
      outputs.push_back(cycle);
    }
    result["kind"] = "netlist";
    result["states"] = states;
    result["outputs"] = outputs;
    result["alert"] = alerts;
  } else {
    const FsmSpec fsm = read_fsm(path);
    const auto states = simulate_spec(fsm, trace);
    nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < trace.size(); ++t) {
      nlohmann::ordered_json cycle = nlohmann::ordered_json::object();
      const auto o = spec_outputs(fsm, fsm.state_index(states[t]), trace[t]);
      for (const auto& d : fsm.outputs) cycle[d.name] = o.count(d.name) ? o.at(d.name) : 0;
      outputs.push_back(cycle);
    }
    result["kind"] = "fsm";
    result["states"] = states;
    result["outputs"] = outputs;
  }
  out << result.dump(1) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FSM fault hardening and fault-injection toolkit", "hardfsm"};
  app.require_subcommand(1);

  HardenArgs h;
  auto* harden_cmd = app.add_subcommand("harden", "Protect an FSM and write netlist, codebook and report");
  harden_cmd->add_option("--fsm", h.fsm, "FSM description (.json or .kiss2)")->required();
  harden_cmd->add_option("--level", h.level, "Protection level N (minimum Hamming distance, >= 2)")->required();
  harden_cmd->add_option("--seed", h.seed, "Seed for code generation");
  harden_cmd->add_option("--error-bits", h.error_bits, "Error bits per diffusion block (default N)");
  harden_cmd->add_flag("--encoded-selectors", h.encoded_selectors, "Replicate match and modifier selection N times");
  harden_cmd->add_option("--blocks", h.blocks, "Number of 32-bit diffusion blocks (default: smallest feasible)");
  harden_cmd->add_option("--out", h.out, "Output directory")->required();

  InjectArgs in;
  auto* inject_cmd = app.add_subcommand("inject", "Run a fault-injection campaign on a hardened netlist");
  inject_cmd->add_option("--netlist", in.netlist, "netlist.json written by harden")->required();
  inject_cmd->add_option("--scope", in.scope, "all, diffusion or inputs");
  inject_cmd->add_option("--effects", in.effects, "Comma-separated subset of flip,stuck0,stuck1");
  inject_cmd->add_option("--max-faults", in.max_faults, "Faults per experiment (attacker budget)");
  auto* ex = inject_cmd->add_flag("--exhaustive", in.exhaustive, "Enumerate every fault set");
  auto* sm = inject_cmd->add_option("--sample", in.sample, "Number of random fault sets");
  ex->excludes(sm);
  inject_cmd->add_option("--seed", in.seed, "Sampling seed");
  inject_cmd->add_option("--trace", in.trace, "auto-cover or a JSON trace file");
  inject_cmd->add_option("--codebook", in.codebook, "Codebook (default: next to the netlist)");
  inject_cmd->add_option("--fsm", in.fsm, "FSM for auto-cover (default: fsm.json next to the netlist)");
  inject_cmd->add_option("--design-report", in.design_report, "Hardening report (default: next to the netlist)");
  inject_cmd->add_option("--cycles", in.cycles, "Fault cycle window FIRST:LAST");
  inject_cmd->add_option("--threads", in.threads, "Worker threads");
  inject_cmd->add_option("--bound", in.bound, "Largest exhaustive campaign");
  inject_cmd->add_option("--out", in.out, "Report path (default: report.json next to the netlist)");

  std::string target;
  std::string trace_file;
  std::string sim_codebook;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate an FSM or a hardened netlist on a trace");
  sim_cmd->add_option("--target", target, "FSM file or netlist.json")->required();
  sim_cmd->add_option("--trace", trace_file, "JSON array of {signal: value} steps")->required();
  sim_cmd->add_option("--codebook", sim_codebook, "Codebook (default: next to the netlist)");

  std::vector<std::string> storage{"hardfsm"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  const Log log(err);
  try {
    if (*harden_cmd) return cmd_harden(h, out, log);
    if (*inject_cmd) return cmd_inject(in, out, log);
    if (*sim_cmd) return cmd_simulate(target, trace_file, sim_codebook, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace hardfsm
