#include "mqlat/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mqlat/error.hpp"
#include "mqlat/ideals_crt.hpp"
#include "mqlat/number_field.hpp"
#include "mqlat/pi_a_lattice.hpp"
#include "mqlat/secrecy_analysis.hpp"
#include "mqlat/wiretap_channel.hpp"

#ifndef MQLAT_VERSION
#define MQLAT_VERSION "0.0.0"
#endif

namespace mqlat::cli {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

json manifest(const std::string& subcommand, std::uint64_t seed, const json& params,
              const std::vector<std::string>& outputs) {
  return {{"artifact", "mqlat"}, {"version", MQLAT_VERSION}, {"subcommand", subcommand},
          {"seed", seed},        {"parameters", params},     {"outputs", outputs}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw Error(ErrorCode::InvalidArgument, "failed writing '" + path + "'");
}

// Sends a report to --out (with its manifest) or to stdout.
void emit(const std::string& content, const std::string& out_path, const std::string& subcommand,
          std::uint64_t seed, const json& params, std::ostream& out) {
  if (out_path.empty()) {
    out << content;
    return;
  }
  write_file(out_path, content);
  write_file(out_path + ".manifest.json", manifest(subcommand, seed, params, {out_path}).dump(2) + "\n");
}

struct SimParams {
  std::int64_t a = 17, b = 33, p = 2;
  std::size_t n = 800, k_e = 0;
  int var_deg = 3, chk_deg = 6;
  std::uint64_t seed = 1;
  double snr_min = 0, snr_max = 24, snr_step = 3;
  std::size_t target_errors = 800, max_frames = 20000;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string mode = "idealized";
  double eve_ratio = 6.0;
  int max_iters = 50;
  std::string channel;
  std::string out;

  json to_json() const {
    return {{"a", a},
            {"b", b},
            {"p", p},
            {"n", n},
            {"k-e", k_e},
            {"var-deg", var_deg},
            {"chk-deg", chk_deg},
            {"seed", seed},
            {"snr-min", snr_min},
            {"snr-max", snr_max},
            {"snr-step", snr_step},
            {"target-errors", target_errors},
            {"max-frames", max_frames},
            {"threads", threads},
            {"mode", mode},
            {"eve-ratio", eve_ratio},
            {"max-iters", max_iters},
            {"channel", channel},
            {"out", out}};
  }
};

template <typename T>
T convert(const std::string& key, const std::string& value) {
  T v{};
  if (!CLI::detail::lexical_conversion<T, T>({value}, v))
    throw Error(ErrorCode::ParseError, "bad value '" + value + "' for " + key);
  return v;
}

// Assigns one key; returns false if the key is unknown.
bool assign(SimParams& s, const std::string& key, const std::string& v) {
  if (key == "a") s.a = convert<std::int64_t>(key, v);
  else if (key == "b") s.b = convert<std::int64_t>(key, v);
  else if (key == "p") s.p = convert<std::int64_t>(key, v);
  else if (key == "n") s.n = convert<std::size_t>(key, v);
  else if (key == "k-e") s.k_e = convert<std::size_t>(key, v);
  else if (key == "var-deg") s.var_deg = convert<int>(key, v);
  else if (key == "chk-deg") s.chk_deg = convert<int>(key, v);
  else if (key == "seed") s.seed = convert<std::uint64_t>(key, v);
  else if (key == "snr-min") s.snr_min = convert<double>(key, v);
  else if (key == "snr-max") s.snr_max = convert<double>(key, v);
  else if (key == "snr-step") s.snr_step = convert<double>(key, v);
  else if (key == "target-errors") s.target_errors = convert<std::size_t>(key, v);
  else if (key == "max-frames") s.max_frames = convert<std::size_t>(key, v);
  else if (key == "threads") s.threads = convert<unsigned>(key, v);
  else if (key == "mode") s.mode = v;
  else if (key == "eve-ratio") s.eve_ratio = convert<double>(key, v);
  else if (key == "max-iters") s.max_iters = convert<int>(key, v);
  else if (key == "channel") s.channel = v;
  else if (key == "out") s.out = v;
  else return false;
  return true;
}

int cmd_field_info(std::int64_t a, std::int64_t b, const std::string& out_path, std::ostream& out) {
  const auto f = build_field(a, b);
  emit(f->to_json().dump(2) + "\n", out_path, "field-info", 0, {{"a", a}, {"b", b}}, out);
  return kExitOk;
}

int cmd_split(std::int64_t a, std::int64_t b, std::int64_t p, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
  const auto f = build_field(a, b);
  json report{{"a", a}, {"b", b}, {"p", p}};
  report["classification"] = {{"a", to_string(quadratic_splitting(f->a(), p))},
                              {"b", to_string(quadratic_splitting(f->b(), p))},
                              {"k", to_string(quadratic_splitting(f->k(), p))}};
  const bool split = splits_completely(*f, p);
  report["completely_split"] = split;
  std::optional<Error> failure;
  if (split) {
    try {
      const auto ctx = build_crt_context(f, p);
      report["num_primes"] = ctx->primes().size();
      report["crt"] = ctx->to_json();
    } catch (const Error& e) {
      failure = e;
    }
  } else {
    failure = Error(ErrorCode::NotCompletelySplit,
                    std::to_string(p) + " does not split completely in Q(sqrt(" + std::to_string(a) + "), sqrt(" +
                        std::to_string(b) + "))");
  }
  emit(report.dump(2) + "\n", out_path, "split", 0, {{"a", a}, {"b", b}, {"p", p}}, out);
  if (failure) {
    err << "error: " << failure->what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_simulate(const SimParams& s, std::ostream& out, std::ostream& err) {
  const auto field = build_field(s.a, s.b);
  const auto ctx = build_crt_context(field, s.p);
  const auto cfg = make_ldpc_config(ctx, s.n, s.k_e, s.seed, s.var_deg, s.chk_deg);
  const ChannelMode mode = parse_channel_mode(s.mode);
  ChannelConfig chan;
  if (s.channel.empty()) {
    chan = default_channel(s.seed, mode);
  } else {
    std::ifstream in(s.channel);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read channel file '" + s.channel + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, s.channel + ": " + e.what());
    }
    chan = ChannelConfig::from_json(j);
    chan.mode = mode;
  }
  chan.eve_noise_ratio = s.eve_ratio;
  chan.validate();

  SweepOptions opts;
  opts.snr_db = snr_grid(s.snr_min, s.snr_max, s.snr_step);
  opts.target_bob_errors = s.target_errors;
  opts.max_frames = s.max_frames;
  opts.threads = s.threads;
  opts.seed = s.seed;
  opts.bp.max_iters = s.max_iters;
  if (s.max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max-iters must be at least 1");
  opts.on_row = [&](const BerRow& r) {
    err << "snr " << r.snr_db << " dB: frames " << r.frames << ", ber_bob " << r.ber_bob() << ", ber_eve "
        << r.ber_eve() << std::endl;
  };
  const auto result = run_ber_sweep(chan, cfg, opts);
  std::ostringstream csv;
  write_ber_csv(result, csv);
  if (s.out.empty()) {
    out << csv.str();
    return kExitOk;
  }
  write_file(s.out, csv.str());
  json m = manifest("simulate", s.seed, s.to_json(), {s.out});
  m["lattice"] = cfg.to_json();
  m["design_rate"] = design_rate(cfg);
  m["channel"] = chan.to_json();
  m["eve_penalty_db"] = eve_penalty_db(chan.eve_noise_ratio);
  auto caps = json::array();
  for (double db : opts.snr_db) {
    const double snr = std::pow(10.0, db / 10.0);
    caps.push_back({{"snr_db", db},
                    {"log_det_bob", compound_log_det(chan.H_b, snr)},
                    {"log_det_eve", compound_log_det(chan.H_e, snr / chan.eve_noise_ratio)}});
  }
  m["compound_log_det"] = caps;
  write_file(s.out + ".manifest.json", m.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, where + "expected 'key = value'");
    const std::string key = normalize_key(trim(line.substr(0, eq))), value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::ParseError, where + "missing key");
    if (value.empty()) throw Error(ErrorCode::ParseError, where + "missing value for '" + key + "'");
    if (kv.count(key)) throw Error(ErrorCode::ParseError, where + "duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Construction pi_A lattice codes over biquadratic fields: field tools, simulation, secrecy"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MQLAT_VERSION);

  std::int64_t a = 17, b = 33, p = 2;
  std::string out_path;

  auto* fi = app.add_subcommand("field-info", "Integral basis, discriminant and embedding of Q(sqrt a, sqrt b)");
  fi->add_option("--a", a, "first radicand")->capture_default_str();
  fi->add_option("--b", b, "second radicand")->capture_default_str();
  fi->add_option("--out", out_path, "write the JSON report here (plus a manifest)");

  auto* sp = app.add_subcommand("split", "Decomposition of p and, if completely split, its CRT data");
  sp->add_option("--a", a, "first radicand")->capture_default_str();
  sp->add_option("--b", b, "second radicand")->capture_default_str();
  sp->add_option("--p", p, "rational prime")->capture_default_str();
  sp->add_option("--out", out_path, "write the JSON report here (plus a manifest)");

  auto* sim = app.add_subcommand("simulate", "Bob/Eve BER sweep over the compound MIMO wiretap channel");
  std::string config_path;
  SimParams defaults;
  sim->add_option("--config", config_path, "key = value configuration file; flags override it");
  std::map<std::string, std::optional<std::string>> sim_flags;
  const std::vector<std::pair<std::string, std::string>> sim_keys = {
      {"a", "first radicand"},
      {"b", "second radicand"},
      {"p", "rational prime (binary levels need 2)"},
      {"n", "symbols per codeword (LDPC length)"},
      {"k-e", "coarse code dimension per level"},
      {"var-deg", "LDPC variable degree"},
      {"chk-deg", "LDPC check degree"},
      {"seed", "master seed"},
      {"snr-min", "first Bob SNR (dB)"},
      {"snr-max", "last Bob SNR (dB)"},
      {"snr-step", "SNR step (dB)"},
      {"target-errors", "stop a point after this many Bob bit errors"},
      {"max-frames", "frame cap per SNR point"},
      {"threads", "worker threads"},
      {"mode", "idealized or true_zf"},
      {"eve-ratio", "Eve/Bob noise variance ratio"},
      {"max-iters", "BP iterations per level"},
      {"channel", "channel JSON file (default: seeded Rayleigh pair)"},
      {"out", "CSV output path (manifest written alongside)"}};
  for (const auto& [k, help] : sim_keys) {
    std::string def;
    const json dj = defaults.to_json()[k];
    def = dj.is_string() ? dj.get<std::string>() : dj.dump();
    sim->add_option("--" + k, sim_flags[k], help + (def.empty() ? "" : " [" + def + "]"));
  }

  auto* sec = app.add_subcommand("secrecy", "Equivalent variance, secrecy-rate bound and leakage bound");
  SecrecyParams sp_params;
  sp_params.c_b = 5.0;
  sp_params.c_e = 1.0;
  std::optional<double> eps, flat_sigma;
  std::int64_t leak_n = 800;
  sec->add_option("--c-b", sp_params.c_b, "Bob compound threshold C_b (nats)")->capture_default_str();
  sec->add_option("--c-e", sp_params.c_e, "Eve compound threshold C_e (nats)")->capture_default_str();
  sec->add_option("--alpha", sp_params.alpha, "algebraic reduction constant")->capture_default_str();
  sec->add_option("--n-a", sp_params.n_a, "transmit antennas")->capture_default_str();
  sec->add_option("--sigma-s", sp_params.sigma_s, "shaping standard deviation")->capture_default_str();
  sec->add_option("--rate", sp_params.rate, "rate R for the leakage bound (nats per channel use)")
      ->capture_default_str();
  sec->add_option("--eps", eps, "flatness factor for the leakage bound, in [0, 1/4]");
  sec->add_option("--n", leak_n, "block length for the leakage bound")->capture_default_str();
  sec->add_option("--flatness-sigma", flat_sigma, "also report the flatness factor of sigma(O_K) at this sigma");
  sec->add_option("--a", a, "first radicand for --flatness-sigma")->capture_default_str();
  sec->add_option("--b", b, "second radicand for --flatness-sigma")->capture_default_str();
  sec->add_option("--out", out_path, "write the JSON report here (plus a manifest)");

  auto* peg = app.add_subcommand("peg", "Build a PEG LDPC code and write it in alist format");
  std::size_t peg_n = 800;
  int dv = 3, dc = 6;
  std::uint64_t seed = 1;
  peg->add_option("--n", peg_n, "block length")->capture_default_str();
  peg->add_option("--var-deg", dv, "variable degree")->capture_default_str();
  peg->add_option("--chk-deg", dc, "check degree")->capture_default_str();
  peg->add_option("--seed", seed, "construction seed")->capture_default_str();
  peg->add_option("--out", out_path, "write the alist here (plus a manifest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fi->parsed()) return cmd_field_info(a, b, out_path, out);
    if (sp->parsed()) return cmd_split(a, b, p, out_path, out, err);
    if (sim->parsed()) {
      SimParams s;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read config '" + config_path + "'");
        for (const auto& [k, v] : parse_config(in, config_path))
          if (!assign(s, k, v)) throw Error(ErrorCode::ParseError, config_path + ": unknown key '" + k + "'");
      }
      for (const auto& [k, v] : sim_flags)
        if (v) assign(s, k, *v);
      return cmd_simulate(s, out, err);
    }
    if (sec->parsed()) {
      json report = secrecy_report(sp_params);
      if (eps) {
        report["eps"] = *eps;
        report["n"] = leak_n;
        report["rate"] = sp_params.rate;
        report["leakage_bits"] = leakage_bound(leak_n, *eps, sp_params.rate);
      }
      if (flat_sigma) {
        const auto f = build_field(a, b);
        const auto est = flatness_theta(LatticeBasis::from_field(*f), *flat_sigma);
        report["flatness"] = {{"a", a}, {"b", b}, {"sigma", *flat_sigma}, {"epsilon", est.epsilon},
                              {"tail_bound", est.tail_bound}};
      }
      const json params{{"c_b", sp_params.c_b},     {"c_e", sp_params.c_e}, {"alpha", sp_params.alpha},
                        {"n_a", sp_params.n_a},     {"sigma_s", sp_params.sigma_s},
                        {"rate", sp_params.rate},   {"n", leak_n}};
      emit(report.dump(2) + "\n", out_path, "secrecy", 0, params, out);
      return kExitOk;
    }
    if (peg->parsed()) {
      const auto code = peg_construct(peg_n, dv, dc, seed);
      std::ostringstream alist;
      write_alist(*code, alist);
      emit(alist.str(), out_path, "peg", seed, {{"n", peg_n}, {"var-deg", dv}, {"chk-deg", dc}, {"seed", seed}},
           out);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Internal ? kExitInternal : kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace mqlat::cli
