#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gralis/gralis.h"
#include "json.hpp"

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class Kind { str, num, count, vec, counts, sigma, pairs, flag, json_file, merge_file, curve_file };

struct Field {
  Field(std::string f, std::string k, Kind kd, std::string h)
      : flag(std::move(f)), key(std::move(k)), kind(kd), help(std::move(h)) {}

  std::string flag;
  std::string key;
  Kind kind;
  std::string help;
  std::string value;
  bool on = false;
  CLI::Option* opt = nullptr;
};

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(1, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush())
    throw CliError(1, "cannot write '" + path.string() + "'");
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw CliError(1, where + ": " + e.what());
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CliError(1, flag + ": cannot parse '" + s + "' as a number");
  }
}

std::uint64_t to_count(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw CliError(1, flag + ": expected a nonnegative integer, got '" + s + "'");
  }
}

json read_curve(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json(text, path);
  json k = json::array();
  json drop = json::array();
  for (const auto& line : split(text, '\n')) {
    std::string row = line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty() || row == "k,drop") continue;
    const auto cells = split(row, ',');
    if (cells.size() != 2) throw CliError(1, path + ": expected rows 'k,drop'");
    k.push_back(to_double(cells[0], path));
    drop.push_back(to_double(cells[1], path));
  }
  return {{"k", k}, {"drop", drop}};
}

void apply(const Field& f, json& config) {
  switch (f.kind) {
    case Kind::str: config[f.key] = f.value; break;
    case Kind::num: config[f.key] = to_double(f.value, f.flag); break;
    case Kind::count: config[f.key] = to_count(f.value, f.flag); break;
    case Kind::sigma:
      config[f.key] = f.value == "uniform" ? json("uniform") : json(to_double(f.value, f.flag));
      break;
    case Kind::pairs:
      if (f.value == "all") {
        config[f.key] = "all";
      } else {
        json arr = json::array();
        for (const auto& s : split(f.value, ',')) arr.push_back(to_count(s, f.flag));
        config[f.key] = arr;
      }
      break;
    case Kind::flag: config[f.key] = true; break;
    case Kind::vec: {
      json arr = json::array();
      if (!f.value.empty())
        for (const auto& s : split(f.value, ',')) arr.push_back(to_double(s, f.flag));
      config[f.key] = arr;
      break;
    }
    case Kind::counts: {
      json arr = json::array();
      for (const auto& s : split(f.value, ',')) arr.push_back(to_count(s, f.flag));
      config[f.key] = arr;
      break;
    }
    case Kind::json_file: config[f.key] = parse_json(read_file(f.value), f.value); break;
    case Kind::merge_file:
    case Kind::curve_file: {
      const json doc =
          f.kind == Kind::curve_file ? read_curve(f.value) : parse_json(read_file(f.value), f.value);
      if (!doc.is_object()) throw CliError(1, f.value + ": expected a JSON object");
      for (const auto& item : doc.items()) config[item.key()] = item.value();
      break;
    }
  }
}

json normalize_keys(const json& in) {
  json out = json::object();
  for (const auto& item : in.items()) {
    std::string key = item.key();
    for (char& ch : key)
      if (ch == '-') ch = '_';
    out[key] = item.value();
  }
  return out;
}

std::vector<Field> engine_fields(bool seed) {
  std::vector<Field> f = {
      {"--model", "model", Kind::str, "zoo model name"},
      {"--params", "params", Kind::vec, "model parameters, comma separated"},
      {"--x", "x", Kind::vec, "input point, comma separated"},
      {"--baseline", "baseline", Kind::vec, "baseline point, comma separated"},
      {"--k", "k", Kind::count, "quadrature nodes"},
      {"--quad", "quad", Kind::str, "right, mid or gauss"},
      {"--path", "path", Kind::str, "simultaneous or sequential"},
      {"--sigma", "sigma", Kind::sigma, "kernel bandwidth or 'uniform'"},
  };
  if (seed) {
    f.push_back({"--mode", "mode", Kind::str, "exact or mc"});
    f.push_back({"--m", "m", Kind::count, "permutations"});
    f.push_back({"--norm", "norm", Kind::str, "feature or global"});
    f.push_back({"--seed", "seed", Kind::count, "random seed"});
    f.push_back({"--antithetic", "antithetic", Kind::flag, "pair each permutation with its reverse"});
  }
  return f;
}

struct Subcommand {
  Subcommand(std::string n, std::string h, bool seed, std::vector<Field> f)
      : name(std::move(n)), help(std::move(h)), uses_seed(seed), fields(std::move(f)) {}

  std::string name;
  std::string help;
  bool uses_seed;
  std::vector<Field> fields;
  CLI::App* app = nullptr;
};

std::vector<Subcommand> build_subcommands() {
  std::vector<Subcommand> subs;
  subs.push_back({"attribute", "exact or Monte-Carlo attribution", true, engine_fields(true)});

  auto converge = engine_fields(true);
  converge.push_back({"--m-grid", "m_grid", Kind::counts, "permutation counts"});
  converge.push_back({"--k-grid", "k_grid", Kind::counts, "quadrature node counts"});
  converge.push_back({"--replicates", "replicates", Kind::count, "seeds per grid point"});
  subs.push_back({"converge", "convergence sweeps in m and k", true, converge});

  subs.push_back({"interactions",
                  "Shapley values and pairwise interaction indices of a game",
                  false,
                  {{"--game", "game", Kind::json_file, "game file {\"n\", \"values\"}"},
                   {"--from-attribution", "from_attribution", Kind::flag,
                    "build the game from --model, --x and --baseline"},
                   {"--model", "model", Kind::str, "zoo model name"},
                   {"--params", "params", Kind::vec, "model parameters"},
                   {"--x", "x", Kind::vec, "input point"},
                   {"--baseline", "baseline", Kind::vec, "baseline point"},
                   {"--pairs", "pairs", Kind::pairs, "'all' or i,j"}}});

  subs.push_back({"anova",
                  "Hoeffding decomposition and Sobol indices on a product grid",
                  false,
                  {{"--model", "model", Kind::str, "zoo model name"},
                   {"--params", "params", Kind::vec, "model parameters"},
                   {"--grid", "grid", Kind::str, "p1,p2[:w1,w2];q1,q2;..."},
                   {"--quad", "quad", Kind::str, "rule for the attribution bridge"},
                   {"--k", "k", Kind::count, "quadrature nodes"},
                   {"--path", "path", Kind::str, "simultaneous or sequential"}}});

  subs.push_back({"multiscale",
                  "inverse-variance aggregation of layer attributions",
                  false,
                  {{"--layers", "layers", Kind::merge_file, "layer file {\"layers\": [...]}"}}});

  auto reduce = engine_fields(false);
  reduce.push_back({"--feature-maps", "feature_maps", Kind::json_file,
                    "feature map file {\"K\",\"H\",\"W\",\"A\",\"G\"}"});
  reduce.push_back({"--relu-lambda", "relu_lambda", Kind::num, "negative scale for the ReLU check"});
  subs.push_back({"reduce", "canonical-triple reductions and limit checks", false, reduce});

  subs.push_back({"audit",
                  "axiomatic property checks",
                  false,
                  {{"--threshold", "threshold", Kind::num, "pass threshold"},
                   {"--sigma", "sigma", Kind::num, "kernel bandwidth"},
                   {"--k", "k", Kind::count, "Gauss-Legendre nodes"}}});

  subs.push_back({"delauc",
                  "deletion AUC of a drop curve",
                  false,
                  {{"--curve", "", Kind::curve_file, "curve file (JSON or CSV k,drop)"},
                   {"--k-values", "k", Kind::vec, "k values"},
                   {"--drops", "drop", Kind::vec, "drop values"}}});
  return subs;
}

int exit_code(gralis_status s) {
  if (s == GRALIS_OK) return 0;
  return s == GRALIS_ERR_NUMERICAL ? 2 : 1;
}

int run(int argc, char** argv) {
  CLI::App app{"Coalition-conditioned path attribution toolkit"};
  app.require_subcommand(1);

  auto subs = build_subcommands();
  std::string config_path;
  std::string out_path;
  unsigned workers = 1;
  bool no_bridge = false;
  for (auto& sub : subs) {
    sub.app = app.add_subcommand(sub.name, sub.help);
    sub.app->add_option("--config", config_path, "JSON config file with flag-named keys");
    sub.app->add_option("--out", out_path, "report path (stdout when omitted)");
    sub.app->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    if (sub.name == "anova") sub.app->add_flag("--no-bridge", no_bridge, "skip the attribution bridge");
    for (auto& f : sub.fields) {
      if (f.kind == Kind::flag) {
        f.opt = sub.app->add_flag(f.flag, f.on, f.help);
      } else {
        f.opt = sub.app->add_option(f.flag, f.value, f.help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const Subcommand* chosen = nullptr;
  for (const auto& sub : subs)
    if (sub.app->parsed()) chosen = &sub;

  json config = json::object();
  if (chosen->uses_seed) {
    if (const char* env = std::getenv("GRALIS_SEED")) config["seed"] = to_count(env, "GRALIS_SEED");
  }
  if (!config_path.empty()) {
    const json file = parse_json(read_file(config_path), config_path);
    if (!file.is_object()) throw CliError(1, config_path + ": expected a JSON object");
    const json normalized = normalize_keys(file);
    for (auto it = normalized.begin(); it != normalized.end(); ++it) config[it.key()] = *it;
  }
  for (const auto& f : chosen->fields)
    if (f.opt->count() > 0) apply(f, config);
  if (no_bridge) config["bridge"] = false;
  config["workers"] = workers;

  char* raw = nullptr;
  const gralis_status status = gralis_run_json(chosen->name.c_str(), config.dump().c_str(), &raw);
  if (status != GRALIS_OK) {
    std::cerr << "error (" << gralis_status_name(status) << "): " << gralis_last_error() << '\n';
    return exit_code(status);
  }
  const ordered_json result = ordered_json::parse(raw);
  gralis_string_free(raw);

  const std::string report = result["report"].dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << report;
    return 0;
  }
  const std::filesystem::path out(out_path);
  write_file(out, report);
  for (const auto& item : result["csv"].items()) {
    std::filesystem::path csv = out;
    csv.replace_filename(out.stem().string() + "_" + item.key() + ".csv");
    write_file(csv, item.value().get<std::string>());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
