// Copyright 2026 The auction_rl Authors.
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

#include "auction_rl/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "auction_rl/oracles.h"
#include "json.hpp"

namespace auction_rl {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Strict JSON reading

class Reader {
 public:
  Reader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool Has(const std::string& key) const { return node_.contains(key); }

  const Json* Child(const std::string& key) {
    if (!node_.contains(key)) return nullptr;
    seen_.insert(key);
    return &node_.at(key);
  }

  void Get(const std::string& key, double& out) {
    if (const Json* v = Child(key)) {
      if (!v->is_number()) throw Error(key, "expected a number");
      out = v->get<double>();
    }
  }
  void Get(const std::string& key, int& out) {
    if (const Json* v = Child(key)) {
      if (!v->is_number_integer()) throw Error(key, "expected an integer");
      out = v->get<int>();
    }
  }
  void Get(const std::string& key, size_t& out) {
    if (const Json* v = Child(key)) {
      if (!v->is_number_unsigned()) throw Error(key, "expected a nonnegative integer");
      out = v->get<size_t>();
    }
  }
  void Get(const std::string& key, bool& out) {
    if (const Json* v = Child(key)) {
      if (!v->is_boolean()) throw Error(key, "expected true or false");
      out = v->get<bool>();
    }
  }
  void Get(const std::string& key, std::string& out) {
    if (const Json* v = Child(key)) {
      if (!v->is_string()) throw Error(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void Get(const std::string& key, std::vector<int>& out) {
    if (const Json* v = Child(key)) {
      if (!v->is_array()) throw Error(key, "expected an array of integers");
      out.clear();
      for (const Json& e : *v) {
        if (!e.is_number_integer()) throw Error(key, "expected an array of integers");
        out.push_back(e.get<int>());
      }
    }
  }
  void Get(const std::string& key, std::vector<double>& out) {
    if (const Json* v = Child(key)) {
      if (!v->is_array()) throw Error(key, "expected an array of numbers");
      out.clear();
      for (const Json& e : *v) {
        if (!e.is_number()) throw Error(key, "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }
  void Get(const std::string& key, std::optional<double>& out) {
    if (const Json* v = Child(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw Error(key, "expected a number or null");
      }
    }
  }
  template <typename Parse>
  void GetEnum(const std::string& key, Parse parse) {
    if (const Json* v = Child(key)) {
      if (!v->is_string()) throw Error(key, "expected a string");
      try {
        parse(v->get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw Error(key, e.what());
      }
    }
  }

  std::string Path(const std::string& key) const { return path_ + "." + key; }

  // Rejects keys that were never read.
  void Finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

 private:
  ConfigError Error(const std::string& key, const std::string& what) const {
    return ConfigError(Path(key) + ": " + what);
  }

  const Json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void ReadAuction(const Json& node, ExperimentConfig& config) {
  Reader r(node, "auction");
  if (const Json* b = r.Child("benchmark")) {
    if (b->is_null()) {
      config.benchmark.reset();
    } else if (b->is_string()) {
      config.benchmark = ParseAuctionId(b->get<std::string>());
      if (!config.benchmark) {
        throw ConfigError("auction.benchmark: unknown auction '" + b->get<std::string>() + "'");
      }
      config.auction = BenchmarkSpec(*config.benchmark);
    } else {
      throw ConfigError("auction.benchmark: expected a string or null");
    }
  }
  AuctionSpec& spec = config.auction;
  r.GetEnum("format", [&](const std::string& s) { spec.format = ParseFormat(s); });
  r.Get("num_bidders", spec.num_bidders);
  if (const Json* v = r.Child("valuation")) {
    Reader vr(*v, "auction.valuation");
    vr.GetEnum("kind", [&](const std::string& s) { spec.valuation.kind = ParseValuationKind(s); });
    if (const Json* bounds = vr.Child("bounds")) {
      if (!bounds->is_array()) throw ConfigError("auction.valuation.bounds: expected pairs");
      spec.valuation.bounds.clear();
      for (const Json& pair : *bounds) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
            !pair[1].is_number()) {
          throw ConfigError("auction.valuation.bounds: expected [lo, hi] pairs");
        }
        spec.valuation.bounds.emplace_back(pair[0].get<double>(), pair[1].get<double>());
      }
    }
    vr.Get("exponent", spec.valuation.exponent);
    vr.Finish();
  }
  r.Get("reserve_price", spec.reserve_price);
  r.GetEnum("risk", [&](const std::string& s) { spec.risk = ParseRisk(s); });
  r.Get("num_rounds", spec.num_rounds);
  r.Get("bid_cap", spec.bid_cap);
  r.Finish();
}

void ReadPpo(const Json& node, PpoConfig& c) {
  Reader r(node, "ppo");
  r.Get("clip", c.clip);
  r.Get("gamma", c.gamma);
  r.Get("policy_lr", c.policy_lr);
  r.Get("value_lr", c.value_lr);
  r.Get("anneal_lr", c.anneal_lr);
  r.Get("entropy_start", c.entropy_start);
  r.Get("entropy_end", c.entropy_end);
  r.Get("iterations", c.iterations);
  r.Get("episodes_per_iteration", c.episodes_per_iteration);
  r.Get("minibatch_size", c.minibatch_size);
  r.Get("epochs", c.epochs);
  r.Get("normalize_advantages", c.normalize_advantages);
  r.GetEnum("mode", [&](const std::string& s) { c.mode = ParseSelfPlayMode(s); });
  r.Get("hidden", c.hidden);
  r.Get("init_log_std", c.init_log_std);
  r.Get("workers", c.workers);
  r.Finish();
}

void ReadFp(const Json& node, FpSettings& f) {
  Reader r(node, "fp");
  r.Get("num_valuations", f.num_valuations);
  r.Get("num_bids", f.num_bids);
  r.Get("iterations", f.iterations);
  r.Get("record_every", f.record_every);
  r.Get("valuation_grid", f.valuation_grid);
  r.Get("bid_grid", f.bid_grid);
  if (const Json* s = r.Child("schedule")) {
    Reader sr(*s, "fp.schedule");
    sr.Get("alpha_power", f.schedule.alpha_power);
    sr.Get("epsilon0", f.schedule.epsilon0);
    sr.Get("epsilon_power", f.schedule.epsilon_power);
    sr.Get("perturbation0", f.schedule.perturbation0);
    sr.Get("perturbation_power", f.schedule.perturbation_power);
    sr.Finish();
  }
  r.Finish();
}

void ReadNfsp(const Json& node, NfspConfig& c) {
  Reader r(node, "nfsp");
  r.Get("num_bids", c.num_bids);
  r.Get("iterations", c.iterations);
  r.Get("episodes_per_iteration", c.episodes_per_iteration);
  r.Get("updates_per_iteration", c.updates_per_iteration);
  r.Get("q_batch_size", c.q_batch_size);
  r.Get("sl_batch_size", c.sl_batch_size);
  r.Get("q_lr", c.q_lr);
  r.Get("sl_lr", c.sl_lr);
  r.Get("anticipatory", c.anticipatory);
  r.Get("rl_capacity", c.rl_capacity);
  r.Get("sl_capacity", c.sl_capacity);
  r.Get("epsilon_start", c.epsilon_start);
  r.Get("epsilon_end", c.epsilon_end);
  r.Get("supervised", c.supervised);
  r.Get("hidden", c.hidden);
  r.Finish();
}

void ReadEvaluation(const Json& node, EvaluationSettings& e) {
  Reader r(node, "evaluation");
  r.Get("type_grid", e.type_grid);
  r.Get("curve_from", e.curve_from);
  r.Get("curve_to", e.curve_to);
  r.Get("exploitability_bid_grid", e.exploitability_bid_grid);
  r.Get("exploitability_samples", e.exploitability_samples);
  r.Get("periodic_samples", e.periodic_samples);
  r.Get("exploitability_every", e.exploitability_every);
  r.Get("symmetric", e.symmetric);
  r.Get("record_wall_time", e.record_wall_time);
  if (const Json* t = r.Child("thresholds")) {
    Reader tr(*t, "evaluation.thresholds");
    tr.Get("oracle_linf", e.thresholds.oracle_linf);
    tr.Get("exploitability", e.thresholds.exploitability);
    tr.Get("require_monotone", e.thresholds.require_monotone);
    tr.Finish();
  }
  r.Finish();
}

Json OptionalJson(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json AuctionJson(const ExperimentConfig& c) {
  const AuctionSpec& s = c.auction;
  Json bounds = Json::array();
  for (const auto& [lo, hi] : s.valuation.bounds) bounds.push_back({lo, hi});
  return Json{{"benchmark", c.benchmark ? Json(AuctionIdName(*c.benchmark)) : Json(nullptr)},
              {"format", FormatName(s.format)},
              {"num_bidders", s.num_bidders},
              {"valuation",
               {{"kind", ValuationKindName(s.valuation.kind)},
                {"bounds", bounds},
                {"exponent", s.valuation.exponent}}},
              {"reserve_price", s.reserve_price},
              {"risk", RiskName(s.risk)},
              {"num_rounds", s.num_rounds},
              {"bid_cap", s.bid_cap}};
}

Json PpoJson(const PpoConfig& c) {
  return Json{{"clip", c.clip},
              {"gamma", c.gamma},
              {"policy_lr", c.policy_lr},
              {"value_lr", c.value_lr},
              {"anneal_lr", c.anneal_lr},
              {"entropy_start", c.entropy_start},
              {"entropy_end", c.entropy_end},
              {"iterations", c.iterations},
              {"episodes_per_iteration", c.episodes_per_iteration},
              {"minibatch_size", c.minibatch_size},
              {"epochs", c.epochs},
              {"normalize_advantages", c.normalize_advantages},
              {"mode", SelfPlayModeName(c.mode)},
              {"hidden", c.hidden},
              {"init_log_std", c.init_log_std},
              {"workers", c.workers}};
}

Json FpJson(const FpSettings& f) {
  return Json{{"num_valuations", f.num_valuations},
              {"num_bids", f.num_bids},
              {"iterations", f.iterations},
              {"record_every", f.record_every},
              {"valuation_grid", f.valuation_grid},
              {"bid_grid", f.bid_grid},
              {"schedule",
               {{"alpha_power", f.schedule.alpha_power},
                {"epsilon0", f.schedule.epsilon0},
                {"epsilon_power", f.schedule.epsilon_power},
                {"perturbation0", f.schedule.perturbation0},
                {"perturbation_power", f.schedule.perturbation_power}}}};
}

Json NfspJson(const NfspConfig& c) {
  return Json{{"num_bids", c.num_bids},
              {"iterations", c.iterations},
              {"episodes_per_iteration", c.episodes_per_iteration},
              {"updates_per_iteration", c.updates_per_iteration},
              {"q_batch_size", c.q_batch_size},
              {"sl_batch_size", c.sl_batch_size},
              {"q_lr", c.q_lr},
              {"sl_lr", c.sl_lr},
              {"anticipatory", c.anticipatory},
              {"rl_capacity", c.rl_capacity},
              {"sl_capacity", c.sl_capacity},
              {"epsilon_start", c.epsilon_start},
              {"epsilon_end", c.epsilon_end},
              {"supervised", c.supervised},
              {"hidden", c.hidden}};
}

Json EvaluationJson(const EvaluationSettings& e) {
  return Json{{"type_grid", e.type_grid},
              {"curve_from", e.curve_from},
              {"curve_to", e.curve_to},
              {"exploitability_bid_grid", e.exploitability_bid_grid},
              {"exploitability_samples", e.exploitability_samples},
              {"periodic_samples", e.periodic_samples},
              {"exploitability_every", e.exploitability_every},
              {"symmetric", e.symmetric},
              {"record_wall_time", e.record_wall_time},
              {"thresholds",
               {{"oracle_linf", OptionalJson(e.thresholds.oracle_linf)},
                {"exploitability", OptionalJson(e.thresholds.exploitability)},
                {"require_monotone", e.thresholds.require_monotone}}}};
}

bool IsNeural(Algorithm a) { return a == Algorithm::kPpo || a == Algorithm::kVanillaPg; }
bool IsTabular(Algorithm a) { return a == Algorithm::kFp || a == Algorithm::kGwfp; }

// ---------------------------------------------------------------------------
// Presets

struct PresetEntry {
  std::string name;
  std::string description;
  ExperimentConfig (*make)();
};

ExperimentConfig PpoPreset(AuctionId id, const std::string& description) {
  ExperimentConfig c;
  c.name = AuctionIdName(id);
  c.description = description;
  c.benchmark = id;
  c.auction = BenchmarkSpec(id);
  c.algorithm = Algorithm::kPpo;
  c.ppo.policy_lr = 1e-3;
  c.ppo.iterations = 1000;
  c.ppo.episodes_per_iteration = 512;
  c.ppo.minibatch_size = 256;
  c.ppo.epochs = 4;
  c.output_dir = "runs/" + c.name;
  return c;
}

ExperimentConfig WithThresholds(ExperimentConfig c, std::optional<double> linf,
                                std::optional<double> eps) {
  c.evaluation.thresholds.oracle_linf = linf;
  c.evaluation.thresholds.exploitability = eps;
  return c;
}

ExperimentConfig FpPreset(const std::string& name, const std::string& description,
                          Algorithm algorithm) {
  ExperimentConfig c;
  c.name = name;
  c.description = description;
  c.benchmark = AuctionId::kFpaUniform;
  c.auction = BenchmarkSpec(AuctionId::kFpaUniform);
  c.algorithm = algorithm;
  c.output_dir = "runs/" + name;
  return c;
}

const std::vector<PresetEntry>& Presets() {
  static const std::vector<PresetEntry> presets = {
      {"fpa_uniform", "First price, 2 bidders, UNIF(0,1)",
       [] {
         return WithThresholds(PpoPreset(AuctionId::kFpaUniform,
                                         "First price, 2 bidders, UNIF(0,1)"),
                               0.05, 0.01);
       }},
      {"fpa_power", "First price, 2 bidders, F(v) = v^0.5 on [0,1]",
       [] {
         return WithThresholds(PpoPreset(AuctionId::kFpaPower,
                                         "First price, 2 bidders, F(v) = v^0.5 on [0,1]"),
                               0.07, 0.015);
       }},
      {"fpa_risk_averse", "First price, 2 bidders, UNIF(0,1), utility sqrt(surplus)",
       [] {
         return WithThresholds(
             PpoPreset(AuctionId::kFpaRiskAverse,
                       "First price, 2 bidders, UNIF(0,1), utility sqrt(surplus)"),
             0.07, 0.015);
       }},
      {"fpa_asymmetric", "First price, UNIF(0,1.33) against UNIF(0,0.8), one policy per seat",
       [] {
         ExperimentConfig c = WithThresholds(
             PpoPreset(AuctionId::kFpaAsymmetric,
                       "First price, UNIF(0,1.33) against UNIF(0,0.8), one policy per seat"),
             std::nullopt, 0.015);
         c.ppo.mode = SelfPlayMode::kIndependentPolicies;
         c.evaluation.symmetric = false;
         c.evaluation.thresholds.require_monotone = true;
         return c;
       }},
      {"fpa_reserve", "First price, 2 bidders, UNIF(0,1), reserve price 0.25",
       [] {
         return WithThresholds(PpoPreset(AuctionId::kFpaReserve,
                                         "First price, 2 bidders, UNIF(0,1), reserve price 0.25"),
                               0.05, 0.01);
       }},
      {"spa_uniform", "Second price, 2 bidders, UNIF(0,1)",
       [] {
         return WithThresholds(PpoPreset(AuctionId::kSpaUniform,
                                         "Second price, 2 bidders, UNIF(0,1)"),
                               0.05, 0.01);
       }},
      {"all_pay", "All-pay, 2 bidders, UNIF(0,1)",
       [] {
         ExperimentConfig c = WithThresholds(
             PpoPreset(AuctionId::kAllPay, "All-pay, 2 bidders, UNIF(0,1)"), 0.07, 0.015);
         c.ppo.iterations = 2000;
         return c;
       }},
      {"third_price", "Third price, 3 bidders, UNIF(0,1)",
       [] {
         ExperimentConfig c = WithThresholds(
             PpoPreset(AuctionId::kThirdPrice, "Third price, 3 bidders, UNIF(0,1)"), 0.10, 0.02);
         c.evaluation.curve_from = 0.1;
         c.evaluation.curve_to = 0.9;
         return c;
       }},
      {"fpa_common", "First price, 2 bidders, common value, signals k_i + t",
       [] {
         return WithThresholds(
             PpoPreset(AuctionId::kFpaCommon,
                       "First price, 2 bidders, common value, signals k_i + t"),
             0.07, 0.015);
       }},
      {"spa_common", "Second price, 3 bidders, common value, signals UNIF(0, 2v)",
       [] {
         return WithThresholds(
             PpoPreset(AuctionId::kSpaCommon,
                       "Second price, 3 bidders, common value, signals UNIF(0, 2v)"),
             0.07, 0.015);
       }},
      {"korean", "Korean auction, 2 bidders, high-bidder signal then first price",
       [] {
         ExperimentConfig c = PpoPreset(
             AuctionId::kKorean, "Korean auction, 2 bidders, high-bidder signal then first price");
         // Round-0 signalling keeps the game non-stationary late in training.
         c.ppo.anneal_lr = true;
         return WithThresholds(c, std::nullopt, 0.015);
       }},
      {"fp_micro", "Fictitious play on the 2x3 discretized first-price micro-game",
       [] {
         ExperimentConfig c =
             FpPreset("fp_micro", "Fictitious play on the 2x3 discretized first-price micro-game",
                      Algorithm::kFp);
         c.fp.valuation_grid = {0.5, 1.0};
         c.fp.bid_grid = {0.0, 0.25, 0.5};
         c.fp.num_valuations = 2;
         c.fp.num_bids = 3;
         c.fp.iterations = 200;
         c.fp.record_every = 1;
         return c;
       }},
      {"fp_fpa", "Fictitious play on first price, 21 valuations x 51 bids",
       [] {
         ExperimentConfig c = FpPreset(
             "fp_fpa", "Fictitious play on first price, 21 valuations x 51 bids", Algorithm::kFp);
         c.evaluation.thresholds.exploitability = 0.04;
         return c;
       }},
      {"gwfp_fpa", "Generalized weakened fictitious play on first price, 21 x 51",
       [] {
         ExperimentConfig c =
             FpPreset("gwfp_fpa", "Generalized weakened fictitious play on first price, 21 x 51",
                      Algorithm::kGwfp);
         c.fp.schedule.alpha_power = 0.8;
         c.fp.schedule.epsilon0 = 0.05;
         c.fp.schedule.perturbation0 = 0.02;
         c.evaluation.thresholds.exploitability = 0.04;
         return c;
       }},
      {"nfsp_fpa", "Neural fictitious self-play on first price, 51 bids",
       [] {
         ExperimentConfig c = FpPreset(
             "nfsp_fpa", "Neural fictitious self-play on first price, 51 bids", Algorithm::kNfsp);
         c.nfsp.iterations = 10000;
         c.nfsp.episodes_per_iteration = 128;
         c.nfsp.updates_per_iteration = 2;
         c.nfsp.q_lr = 3e-3;
         c.nfsp.sl_lr = 3e-3;
         c.evaluation.exploitability_every = 500;
         c.evaluation.symmetric = false;
         c.evaluation.thresholds.oracle_linf = 0.05;
         return c;
       }},
      {"nfsp_spa", "Neural fictitious self-play on second price, 51 bids",
       [] {
         ExperimentConfig c = FpPreset(
             "nfsp_spa", "Neural fictitious self-play on second price, 51 bids", Algorithm::kNfsp);
         c.benchmark = AuctionId::kSpaUniform;
         c.auction = BenchmarkSpec(AuctionId::kSpaUniform);
         c.nfsp.iterations = 10000;
         c.nfsp.episodes_per_iteration = 128;
         c.nfsp.updates_per_iteration = 2;
         c.nfsp.q_lr = 3e-3;
         c.nfsp.sl_lr = 3e-3;
         c.evaluation.exploitability_every = 500;
         c.evaluation.symmetric = false;
         // Near-equivalent bids above the valuation keep the mean bid loose;
         // judge by exact exploitability at two bid steps instead.
         c.evaluation.thresholds.exploitability = 0.04;
         return c;
       }},
      {"vpg_fpa", "Vanilla policy gradient ablation on first price, UNIF(0,1)",
       [] {
         ExperimentConfig c = PpoPreset(AuctionId::kFpaUniform,
                                        "Vanilla policy gradient ablation on first price, "
                                        "UNIF(0,1)");
         c.name = "vpg_fpa";
         c.output_dir = "runs/vpg_fpa";
         c.algorithm = Algorithm::kVanillaPg;
         return c;
       }},
  };
  return presets;
}

// ---------------------------------------------------------------------------
// Artifacts

std::string Num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string Opt(const std::optional<double>& x) { return x ? Num(*x) : std::string(); }

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void WriteMetrics(const fs::path& path, const std::vector<IterationLog>& log,
                  bool wall_time) {
  std::ofstream out = OpenOut(path);
  out << "iteration,mean_reward_per_agent,policy_std,oracle_L2,oracle_Linf,"
         "exploitability_eps,wall_time_s\n";
  for (const IterationLog& r : log) {
    out << r.iteration << "," << Num(r.mean_reward_per_agent) << "," << Num(r.policy_std)
        << "," << Opt(r.oracle_l2) << "," << Opt(r.oracle_linf) << ","
        << Opt(r.exploitability) << "," << (wall_time ? Num(r.wall_time_s) : "") << "\n";
  }
}

struct ExploitabilityRow {
  int iteration = 0;
  AgentExploitability agent;
};

void WriteExploitability(const fs::path& path, const std::vector<ExploitabilityRow>& rows) {
  std::ofstream out = OpenOut(path);
  out << "iteration,agent,epsilon,std_error,bid_grid,samples,type_grid\n";
  for (const ExploitabilityRow& r : rows) {
    out << r.iteration << "," << r.agent.agent << "," << Num(r.agent.epsilon) << ","
        << Num(r.agent.std_error) << "," << r.agent.bid_grid_size << "," << r.agent.samples
        << "," << r.agent.type_grid_size << "\n";
  }
}

struct CurveRow {
  int policy = 0;
  int round = 0;
  int signal = 0;
  double type = 0.0;
  double learned = 0.0;
  std::optional<double> oracle;
};

void WriteCurve(const fs::path& path, const std::vector<CurveRow>& rows) {
  std::ofstream out = OpenOut(path);
  out << "policy,round,signal,type,learned_bid,oracle_bid\n";
  for (const CurveRow& r : rows) {
    out << r.policy << "," << r.round << "," << r.signal << "," << Num(r.type) << ","
        << Num(r.learned) << "," << Opt(r.oracle) << "\n";
  }
}

EpisodeState CurveState(const AuctionSpec& spec, int seat, double type, int round,
                        int signal) {
  EpisodeState s;
  s.bidder_id = seat;
  s.type = type;
  s.round = round;
  if (spec.format == AuctionFormat::kKorean) {
    s.observation = {static_cast<double>(round), static_cast<double>(signal)};
  }
  return s;
}

std::optional<double> Reference(const ExperimentConfig& c, double type) {
  if (!c.benchmark) return std::nullopt;
  return ReferenceBid(*c.benchmark, type);
}

std::vector<double> CurveTypes(const ExperimentConfig& c, int seat) {
  const auto [lo, hi] = c.auction.TypeSupport(seat);
  return InteriorGrid(lo, hi, c.evaluation.type_grid, c.evaluation.curve_from,
                      c.evaluation.curve_to);
}

// Curves of `profile` for the seats in `seats`, labelled by policy index.
std::vector<CurveRow> ProfileCurves(const ExperimentConfig& c, const StrategyProfile& profile,
                                    const std::vector<int>& seats) {
  std::vector<CurveRow> rows;
  const bool korean = c.auction.format == AuctionFormat::kKorean;
  const std::vector<std::pair<int, int>> stages =
      korean ? std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {1, 1}}
             : std::vector<std::pair<int, int>>{{0, 0}};
  for (size_t p = 0; p < seats.size(); ++p) {
    const int seat = seats[p];
    for (const auto& [round, signal] : stages) {
      for (double t : CurveTypes(c, seat)) {
        CurveRow row{static_cast<int>(p), round, signal, t,
                     profile[seat](CurveState(c.auction, seat, t, round, signal)),
                     korean ? std::nullopt : Reference(c, t)};
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::optional<OracleDistance> CurveDistance(const std::vector<CurveRow>& rows) {
  std::optional<OracleDistance> worst;
  std::map<int, std::pair<double, int>> sums;
  for (const CurveRow& r : rows) {
    if (!r.oracle) continue;
    const double d = r.learned - *r.oracle;
    if (!worst) worst = OracleDistance{};
    worst->linf = std::max(worst->linf, std::abs(d));
    sums[r.policy].first += d * d;
    ++sums[r.policy].second;
  }
  for (const auto& [policy, s] : sums) {
    worst->l2 = std::max(worst->l2, std::sqrt(s.first / s.second));
  }
  return worst;
}

std::vector<int> PolicySeats(const AuctionSpec& spec, bool shared) {
  std::vector<int> seats;
  for (int i = 0; i < (shared ? 1 : spec.num_bidders); ++i) seats.push_back(i);
  return seats;
}

StrategyProfile Tabulate(const AuctionSpec& spec, const StrategyProfile& profile) {
  StrategyProfile out;
  for (int i = 0; i < spec.num_bidders; ++i) {
    out.push_back(TabulateBidFunction(spec, i, profile[i]));
  }
  return out;
}

ExploitabilityOptions Options(const ExperimentConfig& c, int samples, uint64_t seed,
                              bool shared) {
  ExploitabilityOptions o;
  o.bid_grid = c.evaluation.exploitability_bid_grid;
  o.mc_samples = samples;
  o.type_grid = c.evaluation.type_grid;
  o.seed = seed;
  o.symmetric = shared && c.evaluation.symmetric;
  return o;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out = OpenOut(path);
  out << text;
}

bool Discretizable(const AuctionSpec& spec) {
  return !spec.IsCommonValue() && spec.format != AuctionFormat::kKorean &&
         spec.num_bidders >= 2 && spec.num_bidders <= 3;
}

DiscretizedGame MakeGame(const ExperimentConfig& c) {
  const FpSettings& f = c.fp;
  if (f.valuation_grid.empty() && f.bid_grid.empty()) {
    return Discretize(c.auction, f.num_valuations, f.num_bids);
  }
  const DiscretizedGame base = Discretize(c.auction, f.num_valuations, f.num_bids);
  std::vector<std::vector<double>> valuations(c.auction.num_bidders);
  std::vector<std::vector<double>> weights(c.auction.num_bidders);
  for (int i = 0; i < c.auction.num_bidders; ++i) {
    valuations[i] = f.valuation_grid.empty() ? base.valuations(i) : f.valuation_grid;
    weights[i].assign(valuations[i].size(), 1.0 / valuations[i].size());
  }
  return DiscretizedGame(c.auction, valuations, weights,
                         f.bid_grid.empty() ? base.bids() : f.bid_grid);
}

// Average-policy probabilities at the grid valuations, as a tabular profile.
Profile NfspGridProfile(const AuctionSpec& spec, const DiscretizedGame& game,
                        const std::vector<SoftmaxPolicy>& policies) {
  Profile profile;
  for (int i = 0; i < game.num_players(); ++i) {
    EmpiricalStrategy s;
    for (double v : game.valuations(i)) {
      s.probs.push_back(policies[i].Probabilities(StateFeatures(spec, CurveState(spec, i, v, 0, 0))));
      s.play_counts.emplace_back(game.num_bids(), 0);
    }
    profile.push_back(std::move(s));
  }
  return profile;
}

std::string Summary(const ExperimentConfig& c, const RunResult& r, double seconds) {
  std::ostringstream s;
  s << "run " << c.name << " (" << AlgorithmName(c.algorithm) << ", seed " << c.seed << ")\n"
    << "  iterations completed: " << r.iterations_completed << "\n"
    << "  final oracle Linf:    "
    << (r.final_oracle_linf ? Num(*r.final_oracle_linf) : "n/a") << "\n"
    << "  final exploitability: "
    << (r.final_exploitability ? Num(*r.final_exploitability) : "n/a") << "\n"
    << "  elapsed seconds:      " << Num(std::round(seconds * 10) / 10) << "\n"
    << "  status:               " << r.message << "\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// Runners

RunResult RunPolicyGradient(const ExperimentConfig& c, const fs::path& dir) {
  const AuctionSpec& spec = c.auction;
  const bool shared = c.ppo.mode == SelfPlayMode::kSharedPolicy;
  const std::vector<int> seats = PolicySeats(spec, shared);
  std::vector<ExploitabilityRow> eps_rows;
  const int total = c.ppo.iterations;

  TrainHooks hooks;
  hooks.exploitability_every = c.evaluation.exploitability_every;
  hooks.oracle_error = [&](const PolicySet& set) {
    return CurveDistance(ProfileCurves(c, MeanProfile(spec, set), seats));
  };
  auto evaluate = [&](const PolicySet& set, int iteration, bool final_eval) {
    const int samples =
        final_eval ? c.evaluation.exploitability_samples : c.evaluation.periodic_samples;
    const ExploitabilityReport report = EstimateExploitability(
        spec, Tabulate(spec, MeanProfile(spec, set)),
        Options(c, samples, DeriveSeed(c.seed, {11, static_cast<uint64_t>(iteration)}), shared));
    for (const AgentExploitability& a : report.agents) eps_rows.push_back({iteration, a});
    return report.Headline();
  };
  hooks.exploitability = [&](const PolicySet& set, int k) {
    return evaluate(set, k + 1, k + 1 == total);
  };

  TrainResult trained = c.algorithm == Algorithm::kPpo ? Train(spec, c.ppo, c.seed, hooks)
                                                       : TrainVanillaPg(spec, c.ppo, c.seed, hooks);
  for (IterationLog& row : trained.log) ++row.iteration;

  RunResult result;
  result.iterations_completed = trained.iterations_completed;
  if (trained.log.empty() || !trained.log.back().exploitability) {
    const double eps = evaluate(trained.policies, trained.iterations_completed, true);
    if (!trained.log.empty()) trained.log.back().exploitability = eps;
    result.final_exploitability = eps;
  } else {
    result.final_exploitability = trained.log.back().exploitability;
  }
  const std::vector<CurveRow> curve = ProfileCurves(c, MeanProfile(spec, trained.policies), seats);
  if (const auto d = CurveDistance(curve)) result.final_oracle_linf = d->linf;

  WriteMetrics(dir / "metrics.csv", trained.log, c.evaluation.record_wall_time);
  WriteCurve(dir / "bid_curve.csv", curve);
  WriteExploitability(dir / "exploitability.csv", eps_rows);
  Checkpoint ckpt;
  ckpt.policy_kind = "gaussian";
  ckpt.auction = c.benchmark ? AuctionIdName(*c.benchmark) : "custom";
  ckpt.seed = c.seed;
  ckpt.iteration = trained.iterations_completed;
  for (size_t p = 0; p < trained.policies.policies.size(); ++p) {
    ckpt.networks.push_back(ToRecord(trained.policies.policies[p], static_cast<int>(p)));
    ckpt.networks.push_back(
        ToRecord(trained.policies.values[p].net(), "value", static_cast<int>(p)));
  }
  WriteCheckpoint((dir / "checkpoint.txt").string(), ckpt);
  if (trained.divergence) {
    WriteText(dir / "divergence.txt", *trained.divergence + "\n");
    result.exit_code = 3;
    result.message = "diverged at " + *trained.divergence;
  } else {
    result.message = "completed";
  }
  return result;
}

RunResult RunNfsp(const ExperimentConfig& c, const fs::path& dir) {
  const AuctionSpec& spec = c.auction;
  std::optional<DiscretizedGame> game;
  if (Discretizable(spec)) {
    game.emplace(Discretize(spec, c.evaluation.type_grid, c.nfsp.num_bids));
  }
  const std::vector<int> seats = PolicySeats(spec, false);
  std::vector<ExploitabilityRow> eps_rows;
  const int total = c.nfsp.iterations;
  auto averages = [](const NfspResult& r) {
    std::vector<SoftmaxPolicy> out;
    for (const NfspAgent& a : r.agents) out.push_back(a.average());
    return out;
  };
  auto evaluate = [&](const NfspResult& r, int iteration, bool final_eval) {
    if (game) {
      const std::vector<double> eps = ExactExploitability(*game, NfspGridProfile(spec, *game, averages(r)));
      double worst = 0.0;
      for (int i = 0; i < static_cast<int>(eps.size()); ++i) {
        eps_rows.push_back({iteration, {i, eps[i], 0.0, game->num_bids(), 0,
                                        game->num_valuations(i)}});
        worst = i == 0 ? eps[i] : std::max(worst, eps[i]);
      }
      return worst;
    }
    const int samples =
        final_eval ? c.evaluation.exploitability_samples : c.evaluation.periodic_samples;
    const ExploitabilityReport report = EstimateExploitability(
        spec, Tabulate(spec, AverageMeanProfile(spec, averages(r), r.bid_grid)),
        Options(c, samples, DeriveSeed(c.seed, {11, static_cast<uint64_t>(iteration)}), false));
    for (const AgentExploitability& a : report.agents) eps_rows.push_back({iteration, a});
    return report.Headline();
  };
  NfspHooks hooks;
  hooks.exploitability_every = c.evaluation.exploitability_every;
  hooks.oracle_error = [&](const NfspResult& r) {
    return CurveDistance(ProfileCurves(c, AverageMeanProfile(spec, averages(r), r.bid_grid), seats));
  };
  hooks.exploitability = [&](const NfspResult& r, int k) {
    return evaluate(r, k + 1, k + 1 == total);
  };
  NfspResult trained = NfspTrain(spec, c.nfsp, c.seed, hooks);
  for (IterationLog& row : trained.log) ++row.iteration;

  RunResult result;
  result.iterations_completed = trained.iterations_completed;
  if (trained.log.empty() || !trained.log.back().exploitability) {
    const double eps = evaluate(trained, trained.iterations_completed, true);
    if (!trained.log.empty()) trained.log.back().exploitability = eps;
    result.final_exploitability = eps;
  } else {
    result.final_exploitability = trained.log.back().exploitability;
  }
  const std::vector<CurveRow> curve =
      ProfileCurves(c, AverageMeanProfile(spec, averages(trained), trained.bid_grid), seats);
  if (const auto d = CurveDistance(curve)) result.final_oracle_linf = d->linf;

  WriteMetrics(dir / "metrics.csv", trained.log, c.evaluation.record_wall_time);
  WriteCurve(dir / "bid_curve.csv", curve);
  WriteExploitability(dir / "exploitability.csv", eps_rows);
  Checkpoint ckpt;
  ckpt.policy_kind = "softmax";
  ckpt.auction = c.benchmark ? AuctionIdName(*c.benchmark) : "custom";
  ckpt.seed = c.seed;
  ckpt.iteration = trained.iterations_completed;
  ckpt.bid_grid = trained.bid_grid;
  for (size_t i = 0; i < trained.agents.size(); ++i) {
    ckpt.networks.push_back(
        ToRecord(trained.agents[i].average().logit_net(), "average", static_cast<int>(i)));
    ckpt.networks.push_back(ToRecord(trained.agents[i].q_net(), "q", static_cast<int>(i)));
  }
  WriteCheckpoint((dir / "checkpoint.txt").string(), ckpt);
  if (trained.divergence) {
    WriteText(dir / "divergence.txt", *trained.divergence + "\n");
    result.exit_code = 3;
    result.message = "diverged at " + *trained.divergence;
  } else {
    result.message = "completed";
  }
  return result;
}

double BidSpread(const EmpiricalStrategy& s, std::span<const double> bids) {
  double total = 0.0;
  for (size_t v = 0; v < s.probs.size(); ++v) {
    const double mean = s.MeanBid(static_cast<int>(v), bids);
    double var = 0.0;
    for (size_t b = 0; b < bids.size(); ++b) var += s.probs[v][b] * (bids[b] - mean) * (bids[b] - mean);
    total += std::sqrt(var);
  }
  return total / static_cast<double>(s.probs.size());
}

std::vector<CurveRow> TabularCurves(const ExperimentConfig& c, const DiscretizedGame& game,
                                    const Profile& profile) {
  std::vector<CurveRow> rows;
  for (int i = 0; i < game.num_players(); ++i) {
    for (int v = 0; v < game.num_valuations(i); ++v) {
      const double t = game.valuations(i)[v];
      rows.push_back({i, 0, 0, t, profile[i].MeanBid(v, game.bids()), Reference(c, t)});
    }
  }
  return rows;
}

RunResult RunFictitious(const ExperimentConfig& c, const fs::path& dir) {
  const DiscretizedGame game = MakeGame(c);
  const FpTrace trace =
      c.algorithm == Algorithm::kFp
          ? FpIterate(game, c.fp.iterations, c.fp.record_every)
          : GwfpIterate(game, c.fp.iterations, c.fp.schedule, c.seed, c.fp.record_every);
  std::vector<IterationLog> log;
  std::vector<ExploitabilityRow> eps_rows;
  for (size_t k = 0; k < trace.iterations.size(); ++k) {
    const int t = trace.iterations[k];
    IterationLog row;
    row.iteration = t;
    const std::vector<double>& values = trace.values[t - 1];
    const std::vector<double>& eps = trace.exploitability[t - 1];
    row.mean_reward_per_agent =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    row.policy_std = BidSpread(trace.profiles[k][0], game.bids());
    if (const auto d = CurveDistance(TabularCurves(c, game, trace.profiles[k]))) {
      row.oracle_l2 = d->l2;
      row.oracle_linf = d->linf;
    }
    row.exploitability = *std::max_element(eps.begin(), eps.end());
    for (int i = 0; i < game.num_players(); ++i) {
      eps_rows.push_back({t, {i, eps[i], 0.0, game.num_bids(), 0, game.num_valuations(i)}});
    }
    log.push_back(row);
  }
  const std::vector<CurveRow> curve = TabularCurves(c, game, trace.final_profile);
  WriteMetrics(dir / "metrics.csv", log, false);
  WriteCurve(dir / "bid_curve.csv", curve);
  WriteExploitability(dir / "exploitability.csv", eps_rows);
  WriteStrategyCsv((dir / "strategy.csv").string(), game, trace.final_profile,
                   c.benchmark ? AuctionIdName(*c.benchmark) : "custom");
  RunResult result;
  result.iterations_completed = c.fp.iterations;
  result.final_exploitability = log.back().exploitability;
  if (const auto d = CurveDistance(curve)) result.final_oracle_linf = d->linf;
  result.message = "completed";
  return result;
}

// ---------------------------------------------------------------------------
// Reading run directories

std::vector<std::vector<std::string>> ReadCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing artifact " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::vector<CurveRow> ReadCurve(const fs::path& path) {
  std::vector<CurveRow> rows;
  for (const auto& cells : ReadCsv(path)) {
    if (cells.size() < 5) throw std::runtime_error("malformed row in " + path.string());
    CurveRow r{std::stoi(cells[0]), std::stoi(cells[1]), std::stoi(cells[2]), std::stod(cells[3]),
               std::stod(cells[4]), std::nullopt};
    if (cells.size() > 5 && !cells[5].empty()) r.oracle = std::stod(cells[5]);
    rows.push_back(r);
  }
  return rows;
}

Profile ReadStrategy(const fs::path& path, const DiscretizedGame& game) {
  Profile profile(game.num_players());
  for (const auto& cells : ReadCsv(path)) {
    const int player = std::stoi(cells.at(0));
    EmpiricalStrategy& s = profile.at(player);
    std::vector<double> row;
    for (size_t k = 2; k < cells.size(); ++k) row.push_back(std::stod(cells[k]));
    if (static_cast<int>(row.size()) != game.num_bids()) {
      throw std::runtime_error("strategy.csv does not match the bid grid");
    }
    s.probs.push_back(std::move(row));
    s.play_counts.emplace_back(game.num_bids(), 0);
  }
  return profile;
}

BidFunction Interpolated(std::vector<double> xs, std::vector<double> ys) {
  return [xs = std::move(xs), ys = std::move(ys)](const EpisodeState& s) {
    if (s.type <= xs.front()) return ys.front();
    if (s.type >= xs.back()) return ys.back();
    const size_t j = std::upper_bound(xs.begin(), xs.end(), s.type) - xs.begin();
    const double w = (s.type - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + w * (ys[j] - ys[j - 1]);
  };
}

struct LoadedRun {
  ExperimentConfig config;
  std::optional<Checkpoint> checkpoint;
  std::optional<PolicySet> gaussian;
  std::vector<SoftmaxPolicy> softmax;
};

LoadedRun LoadRun(const std::string& run_dir) {
  LoadedRun run;
  run.config = LoadConfig((fs::path(run_dir) / "config.json").string());
  if (IsTabular(run.config.algorithm)) return run;
  run.checkpoint = ReadCheckpoint((fs::path(run_dir) / "checkpoint.txt").string());
  if (run.checkpoint->policy_kind == "gaussian") {
    PolicySet set;
    for (const NetworkRecord& r : run.checkpoint->networks) {
      if (r.role == "policy") set.policies.push_back(GaussianFromRecord(r));
    }
    set.mode = set.policies.size() == 1 ? SelfPlayMode::kSharedPolicy
                                        : SelfPlayMode::kIndependentPolicies;
    run.gaussian = std::move(set);
  } else {
    for (const NetworkRecord& r : run.checkpoint->networks) {
      if (r.role == "average") run.softmax.emplace_back(MlpFromRecord(r));
    }
  }
  return run;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

std::string AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kPpo:
      return "ppo";
    case Algorithm::kVanillaPg:
      return "vanilla_pg";
    case Algorithm::kFp:
      return "fp";
    case Algorithm::kGwfp:
      return "gwfp";
    case Algorithm::kNfsp:
      return "nfsp";
  }
  return "ppo";
}

Algorithm ParseAlgorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kPpo, Algorithm::kVanillaPg, Algorithm::kFp, Algorithm::kGwfp,
                      Algorithm::kNfsp}) {
    if (AlgorithmName(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm: " + name);
}

void ExperimentConfig::Validate() const {
  try {
    auction.Validate();
    if (IsNeural(algorithm)) ppo.Validate();
    if (algorithm == Algorithm::kNfsp) nfsp.Validate();
    if (IsTabular(algorithm)) fp.schedule.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  const EvaluationSettings& e = evaluation;
  require(e.type_grid >= 2, "evaluation.type_grid must be >= 2");
  require(0.0 <= e.curve_from && e.curve_from < e.curve_to && e.curve_to <= 1.0,
          "evaluation.curve_from/curve_to must satisfy 0 <= from < to <= 1");
  require(e.exploitability_bid_grid >= 2, "evaluation.exploitability_bid_grid must be >= 2");
  require(e.exploitability_samples >= 1 && e.periodic_samples >= 1,
          "evaluation sample counts must be >= 1");
  require(e.exploitability_every >= 0, "evaluation.exploitability_every must be >= 0");
  require(!output_dir.empty(), "output_dir must not be empty");
  if (IsNeural(algorithm) && ppo.mode == SelfPlayMode::kSharedPolicy &&
      auction.valuation.kind == ValuationKind::kPrivateUniform) {
    for (const auto& b : auction.valuation.bounds) {
      require(b == auction.valuation.bounds.front(),
              "ppo.mode 'shared' needs identical bidders; use 'independent'");
    }
  }
  if (IsTabular(algorithm)) {
    require(Discretizable(auction), "fictitious play needs a sealed-bid private-value auction "
                                    "with 2 or 3 bidders");
    require(fp.iterations >= 1, "fp.iterations must be >= 1");
    require(fp.record_every >= 1, "fp.record_every must be >= 1");
    require(fp.num_valuations >= 1 && fp.num_bids >= 2, "fp grids too small");
  }
  if (algorithm == Algorithm::kNfsp && Discretizable(auction)) {
    require(auction.num_bidders == 2 || evaluation.type_grid <= 21,
            "nfsp exact evaluation with 3 bidders needs type_grid <= 21");
  }
}

ExperimentConfig ParseConfig(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Reader r(root, "config");
  int version = 0;
  r.Get("version", version);
  if (version != ExperimentConfig::kVersion) {
    throw ConfigError("config.version: expected " + std::to_string(ExperimentConfig::kVersion));
  }
  ExperimentConfig c;
  r.Get("name", c.name);
  r.Get("description", c.description);
  // The auction block goes first so that algorithm defaults can depend on it.
  if (const Json* a = r.Child("auction")) {
    ReadAuction(*a, c);
  } else {
    throw ConfigError("config: missing 'auction' block");
  }
  r.GetEnum("algorithm", [&](const std::string& s) { c.algorithm = ParseAlgorithm(s); });
  if (const Json* p = r.Child("ppo")) ReadPpo(*p, c.ppo);
  if (const Json* f = r.Child("fp")) ReadFp(*f, c.fp);
  if (const Json* n = r.Child("nfsp")) ReadNfsp(*n, c.nfsp);
  r.Get("seed", c.seed);
  r.Get("output_dir", c.output_dir);
  if (const Json* e = r.Child("evaluation")) ReadEvaluation(*e, c.evaluation);
  r.Finish();
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

std::string ConfigToJson(const ExperimentConfig& c) {
  Json root;
  root["version"] = ExperimentConfig::kVersion;
  root["name"] = c.name;
  root["description"] = c.description;
  root["auction"] = AuctionJson(c);
  root["algorithm"] = AlgorithmName(c.algorithm);
  if (IsNeural(c.algorithm)) root["ppo"] = PpoJson(c.ppo);
  if (IsTabular(c.algorithm)) root["fp"] = FpJson(c.fp);
  if (c.algorithm == Algorithm::kNfsp) root["nfsp"] = NfspJson(c.nfsp);
  root["seed"] = c.seed;
  root["output_dir"] = c.output_dir;
  root["evaluation"] = EvaluationJson(c.evaluation);
  return root.dump(2) + "\n";
}

std::vector<PresetInfo> ListPresets() {
  std::vector<PresetInfo> out;
  for (const PresetEntry& p : Presets()) out.push_back({p.name, p.description});
  return out;
}

ExperimentConfig Preset(const std::string& name) {
  for (const PresetEntry& p : Presets()) {
    if (p.name == name) {
      ExperimentConfig c = p.make();
      c.Validate();
      return c;
    }
  }
  throw ConfigError("unknown preset '" + name + "'");
}

RunResult RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  WriteText(dir / "config.json", ConfigToJson(config));
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  switch (config.algorithm) {
    case Algorithm::kPpo:
    case Algorithm::kVanillaPg:
      result = RunPolicyGradient(config, dir);
      break;
    case Algorithm::kNfsp:
      result = RunNfsp(config, dir);
      break;
    case Algorithm::kFp:
    case Algorithm::kGwfp:
      result = RunFictitious(config, dir);
      break;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteText(dir / "run.log", Summary(config, result, seconds));
  return result;
}

bool VerifyReport::Passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed || c.skipped; });
}

VerifyReport Verify(const std::string& run_dir, const std::optional<Thresholds>& thresholds) {
  const fs::path dir(run_dir);
  const ExperimentConfig config = LoadConfig((dir / "config.json").string());
  const Thresholds limits = thresholds.value_or(config.evaluation.thresholds);
  const std::vector<CurveRow> curve = ReadCurve(dir / "bid_curve.csv");
  const auto eps_rows = ReadCsv(dir / "exploitability.csv");
  ReadCsv(dir / "metrics.csv");

  VerifyReport report;
  {
    CheckResult check{"oracle_linf", std::nullopt, limits.oracle_linf, false, false, ""};
    const auto distance = CurveDistance(curve);
    if (distance) check.value = distance->linf;
    if (!distance) {
      check.skipped = true;
      check.note = "no closed-form reference";
    } else if (!limits.oracle_linf) {
      check.skipped = true;
      check.note = "no threshold";
    } else {
      check.passed = distance->linf <= *limits.oracle_linf;
    }
    report.checks.push_back(check);
  }
  {
    CheckResult check{"exploitability", std::nullopt, limits.exploitability, false, false, ""};
    int last = -1;
    double worst = 0.0;
    for (const auto& cells : eps_rows) {
      const int it = std::stoi(cells.at(0));
      const double eps = std::stod(cells.at(2));
      if (it > last) {
        last = it;
        worst = eps;
      } else if (it == last) {
        worst = std::max(worst, eps);
      }
    }
    if (last < 0) {
      check.skipped = true;
      check.note = "no exploitability evaluation";
    } else {
      check.value = worst;
      if (!limits.exploitability) {
        check.skipped = true;
        check.note = "no threshold";
      } else {
        check.passed = worst <= *limits.exploitability;
      }
    }
    report.checks.push_back(check);
  }
  if (limits.require_monotone) {
    CheckResult check{"monotone", std::nullopt, 0.0, true, false, ""};
    double worst_drop = 0.0;
    for (size_t k = 1; k < curve.size(); ++k) {
      const CurveRow& a = curve[k - 1];
      const CurveRow& b = curve[k];
      if (a.policy == b.policy && a.round == b.round && a.signal == b.signal) {
        worst_drop = std::max(worst_drop, a.learned - b.learned);
      }
    }
    check.value = worst_drop;
    check.passed = worst_drop <= 0.0;
    report.checks.push_back(check);
  }
  return report;
}

StrategyProfile LoadRunProfile(const std::string& run_dir, ExperimentConfig* config) {
  LoadedRun run = LoadRun(run_dir);
  if (config) *config = run.config;
  const AuctionSpec& spec = run.config.auction;
  if (run.gaussian) return MeanProfile(spec, *run.gaussian);
  if (!run.softmax.empty()) {
    return AverageMeanProfile(spec, run.softmax, run.checkpoint->bid_grid);
  }
  const DiscretizedGame game = MakeGame(run.config);
  const Profile profile = ReadStrategy(fs::path(run_dir) / "strategy.csv", game);
  StrategyProfile out;
  for (int i = 0; i < game.num_players(); ++i) {
    std::vector<double> means;
    for (int v = 0; v < game.num_valuations(i); ++v) means.push_back(profile[i].MeanBid(v, game.bids()));
    out.push_back(Interpolated(game.valuations(i), means));
  }
  return out;
}

ExploitabilityReport EvaluateRunExploitability(const std::string& run_dir,
                                               const ExploitabilityOptions& options) {
  LoadedRun run = LoadRun(run_dir);
  const ExperimentConfig& c = run.config;
  const AuctionSpec& spec = c.auction;
  if (IsTabular(c.algorithm)) {
    const DiscretizedGame game = MakeGame(c);
    const std::vector<double> eps =
        ExactExploitability(game, ReadStrategy(fs::path(run_dir) / "strategy.csv", game));
    ExploitabilityReport report;
    for (int i = 0; i < game.num_players(); ++i) {
      report.agents.push_back({i, eps[i], 0.0, game.num_bids(), 0, game.num_valuations(i)});
    }
    return report;
  }
  StrategyProfile profile = LoadRunProfile(run_dir);
  ExploitabilityOptions o = options;
  if (run.gaussian) o.symmetric = o.symmetric && run.gaussian->mode == SelfPlayMode::kSharedPolicy;
  else o.symmetric = false;
  return EstimateExploitability(spec, Tabulate(spec, profile), o);
}

void DumpStrategy(const std::string& run_dir, const std::string& out_path) {
  LoadedRun run = LoadRun(run_dir);
  const ExperimentConfig& c = run.config;
  const AuctionSpec& spec = c.auction;
  if (IsTabular(c.algorithm)) {
    fs::copy_file(fs::path(run_dir) / "strategy.csv", out_path,
                  fs::copy_options::overwrite_existing);
    return;
  }
  std::ofstream out = OpenOut(out_path);
  const bool korean = spec.format == AuctionFormat::kKorean;
  const std::vector<std::pair<int, int>> stages =
      korean ? std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {1, 1}}
             : std::vector<std::pair<int, int>>{{0, 0}};
  if (run.gaussian) {
    out << "policy,round,signal,type,mean_bid,std_bid\n";
    const PolicySet& set = *run.gaussian;
    for (size_t p = 0; p < set.policies.size(); ++p) {
      const int seat = static_cast<int>(p);
      const auto [lo, hi] = spec.TypeSupport(seat);
      for (const auto& [round, signal] : stages) {
        for (double t : LinearGrid(lo, hi, 101)) {
          const std::vector<double> f =
              StateFeatures(spec, CurveState(spec, seat, t, round, signal));
          out << p << "," << round << "," << signal << "," << Num(t) << ","
              << Num(set.policies[p].MeanBid(f)) << "," << Num(set.policies[p].std_dev())
              << "\n";
        }
      }
    }
    return;
  }
  Json header;
  header["auction"] = run.checkpoint->auction;
  header["bid_grid"] = run.checkpoint->bid_grid;
  out << "# " << header.dump() << "\n";
  out << "player,round,signal,valuation";
  for (double b : run.checkpoint->bid_grid) out << ",b" << Num(b);
  out << "\n";
  for (size_t i = 0; i < run.softmax.size(); ++i) {
    const auto [lo, hi] = spec.TypeSupport(static_cast<int>(i));
    for (const auto& [round, signal] : stages) {
      for (double t : MidpointGrid(lo, hi, c.evaluation.type_grid)) {
        out << i << "," << round << "," << signal << "," << Num(t);
        for (double p : run.softmax[i].Probabilities(
                 StateFeatures(spec, CurveState(spec, static_cast<int>(i), t, round, signal)))) {
          out << "," << Num(p);
        }
        out << "\n";
      }
    }
  }
}

}  // namespace auction_rl
