#include "mcuos/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mcuos/errors.hpp"

namespace mcuos {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::SynthMcuos: return "synth-mcuos";
    case Mode::SynthRmcuos: return "synth-rmcuos";
    case Mode::Mckuos: return "mckuos";
    case Mode::Rmckuos: return "rmckuos";
    case Mode::Denoise: return "denoise";
    case Mode::Cluster: return "cluster";
    case Mode::BoundsCheck: return "bounds-check";
  }
  return "unknown";
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Micusal: return "micusal";
    case Method::Amicusal: return "amicusal";
    case Method::Rmicusal: return "rmicusal";
    case Method::Mckusal: return "mckusal";
    case Method::Rmckusal: return "rmckusal";
  }
  return "unknown";
}

bool is_kernel_method(Method method) noexcept { return method == Method::Mckusal || method == Method::Rmckusal; }
bool uses_partial_data(Method method) noexcept { return method == Method::Rmicusal || method == Method::Rmckusal; }

namespace {

struct KeyInfo {
  const char* key;
  const char* fallback;
  const char* help;
};

// Order here is the order of `describe()` and of the help text.
constexpr KeyInfo kKeys[] = {
    {"run.mode", "(required)", "synth-mcuos | synth-rmcuos | mckuos | rmckuos | denoise | cluster | bounds-check"},
    {"run.run_id", "<mode>", "label written to every CSV row"},
    {"run.seed", "0", "base seed; every trial derives its own streams from it"},
    {"run.trials", "1", "number of independent trials"},
    {"run.jobs", "0", "worker threads, 0 for one per processor"},
    {"run.out", "", "CSV output path"},
    {"synthetic.m", "180", "ambient dimension"},
    {"synthetic.s", "13", "subspace dimension"},
    {"synthetic.L", "5", "number of planted subspaces"},
    {"synthetic.t_s", "0.04", "perturbation between consecutive planted subspaces"},
    {"synthetic.cluster_sizes", "150,100,150,100,150", "points per planted subspace"},
    {"synthetic.sigma_tr_sq", "0.1", "training noise power"},
    {"synthetic.sigma_te_sq", "0.1", "test noise power (list)"},
    {"data.train", "", "CSV of training signals; synthetic data when empty"},
    {"data.labels", "", "CSV of integer labels for the training signals"},
    {"data.test_clean", "", "CSV of clean test signals (noise is added per sigma_te_sq)"},
    {"data.signals_in_rows", "false", "one signal per CSV row instead of per column"},
    {"data.normalize", "false", "scale every signal to unit norm"},
    {"data.missing_frac", "0", "fraction of entries hidden per training signal (list)"},
    {"method.name", "<by mode>", "micusal | amicusal | rmicusal | mckusal | rmckusal"},
    {"method.lambda", "2", "closeness/fit trade-off (list)"},
    {"method.L", "5", "number of subspaces"},
    {"method.s", "13", "subspace dimension"},
    {"method.restarts", "1", "random restarts; the lowest objective wins"},
    {"method.max_outer_iters", "100", "outer iteration cap"},
    {"method.rel_tol", "1e-6", "relative objective change that stops the outer loop"},
    {"method.eta", "0.5", "base step size of the missing-data learner"},
    {"method.inner_iters", "100", "sweeps per subspace of the missing-data learner"},
    {"method.reorth_every", "50", "rank-one updates between re-orthonormalizations"},
    {"method.L_max", "8", "initial number of subspaces of the adaptive learner"},
    {"method.s_max", "20", "initial dimension of the adaptive learner"},
    {"method.k1", "6", "smallest neighbourhood of the dimension estimator"},
    {"method.k2", "10", "largest neighbourhood of the dimension estimator"},
    {"method.eps_min", "0", "normalized distance below which subspaces merge"},
    {"method.kernel", "gaussian", "gaussian | polynomial"},
    {"method.c", "4", "kernel parameter"},
    {"method.d", "1", "polynomial degree"},
    {"method.inner_max_sweeps", "20", "update sweeps per assignment of the kernel learners"},
    {"method.delta_min", "1e-6", "eigenvalue floor of the Gram repair"},
    {"bounds.m", "100", "signal length"},
    {"bounds.omega_size", "25,50", "observed coordinates per trial (list)"},
    {"bounds.delta", "0.05,0.1", "failure probability (list)"},
    {"bounds.trials", "10000", "Monte Carlo trials per setting"},
    {"bounds.pairs", "gaussian", "gaussian | rademacher"},
    {"bounds.gaussian_c", "2", "gaussian kernel parameter"},
    {"bounds.poly_c", "1", "polynomial kernel offset"},
    {"bounds.poly_d", "3", "polynomial kernel degree (odd)"},
};

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  fail(ErrorCode::ConfigError, key + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) bad(key, "cannot parse '" + text + "'");
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number<T>(key, item));
  if (out.empty()) bad(key, "empty list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad(key, "expected true or false, got '" + text + "'");
}

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::SynthMcuos, Mode::SynthRmcuos, Mode::Mckuos, Mode::Rmckuos, Mode::Denoise, Mode::Cluster,
                 Mode::BoundsCheck})
    if (to_string(m) == trim(text)) return m;
  bad("run.mode", "unknown mode '" + text + "'");
}

Method parse_method(const std::string& text) {
  for (Method m : {Method::Micusal, Method::Amicusal, Method::Rmicusal, Method::Mckusal, Method::Rmckusal})
    if (to_string(m) == trim(text)) return m;
  bad("method.name", "unknown method '" + text + "'");
}

Method default_method(Mode mode) {
  switch (mode) {
    case Mode::SynthRmcuos: return Method::Rmicusal;
    case Mode::Mckuos:
    case Mode::Denoise:
    case Mode::Cluster: return Method::Mckusal;
    case Mode::Rmckuos: return Method::Rmckusal;
    default: return Method::Micusal;
  }
}

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
std::string num(int v) { return std::to_string(v); }

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + num(values[i]);
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::ConfigError, "line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::map<std::string, std::string> values;
  std::set<std::string> known;
  for (const auto& k : kKeys) known.insert(k.key);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) bad(section, "keys must live inside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!known.count(full)) bad(full, "unknown key");
      values[full] = value.data();
    }
  }
  auto get = [&](const char* key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };

  ExperimentConfig cfg;
  const std::string* mode = get("run.mode");
  if (!mode) fail(ErrorCode::ConfigError, "run.mode: missing required field");
  cfg.mode = parse_mode(*mode);
  cfg.run_id = std::string(to_string(cfg.mode));
  if (auto v = get("run.run_id")) cfg.run_id = trim(*v);
  if (auto v = get("run.seed")) cfg.seed = parse_number<std::uint64_t>("run.seed", *v);
  if (auto v = get("run.trials")) cfg.trials = parse_number<int>("run.trials", *v);
  if (auto v = get("run.jobs")) cfg.jobs = parse_number<int>("run.jobs", *v);
  if (auto v = get("run.out")) cfg.out = trim(*v);

  auto& syn = cfg.synthetic;
  if (auto v = get("synthetic.m")) syn.m = parse_number<int>("synthetic.m", *v);
  if (auto v = get("synthetic.s")) syn.s = parse_number<int>("synthetic.s", *v);
  if (auto v = get("synthetic.L")) syn.L = parse_number<int>("synthetic.L", *v);
  if (auto v = get("synthetic.t_s")) syn.t_s = parse_number<double>("synthetic.t_s", *v);
  if (auto v = get("synthetic.cluster_sizes")) syn.cluster_sizes = parse_list<int>("synthetic.cluster_sizes", *v);
  if (auto v = get("synthetic.sigma_tr_sq")) syn.sigma_tr_sq = parse_number<double>("synthetic.sigma_tr_sq", *v);
  if (auto v = get("synthetic.sigma_te_sq")) cfg.sigma_te_sq = parse_list<double>("synthetic.sigma_te_sq", *v);
  syn.sigma_te_sq = cfg.sigma_te_sq.front();

  auto& data = cfg.data;
  if (auto v = get("data.train")) data.train = trim(*v);
  if (auto v = get("data.labels")) data.labels = trim(*v);
  if (auto v = get("data.test_clean")) data.test_clean = trim(*v);
  if (auto v = get("data.signals_in_rows")) data.signals_in_rows = parse_bool("data.signals_in_rows", *v);
  if (auto v = get("data.normalize")) data.normalize = parse_bool("data.normalize", *v);
  if (auto v = get("data.missing_frac")) data.missing_fracs = parse_list<double>("data.missing_frac", *v);

  auto& me = cfg.method;
  me.method = default_method(cfg.mode);
  if (auto v = get("method.name")) me.method = parse_method(*v);
  if (auto v = get("method.lambda")) me.lambdas = parse_list<double>("method.lambda", *v);
  if (auto v = get("method.L")) me.L = parse_number<int>("method.L", *v);
  if (auto v = get("method.s")) me.s = parse_number<int>("method.s", *v);
  if (auto v = get("method.restarts")) me.restarts = parse_number<int>("method.restarts", *v);
  if (auto v = get("method.max_outer_iters")) me.max_outer_iters = parse_number<int>("method.max_outer_iters", *v);
  if (auto v = get("method.rel_tol")) me.rel_tol = parse_number<double>("method.rel_tol", *v);
  if (auto v = get("method.eta")) me.eta = parse_number<double>("method.eta", *v);
  if (auto v = get("method.inner_iters")) me.inner_iters = parse_number<int>("method.inner_iters", *v);
  if (auto v = get("method.reorth_every")) me.reorth_every = parse_number<int>("method.reorth_every", *v);
  if (auto v = get("method.L_max")) me.L_max = parse_number<int>("method.L_max", *v);
  if (auto v = get("method.s_max")) me.s_max = parse_number<int>("method.s_max", *v);
  if (auto v = get("method.k1")) me.k1 = parse_number<int>("method.k1", *v);
  if (auto v = get("method.k2")) me.k2 = parse_number<int>("method.k2", *v);
  if (auto v = get("method.eps_min")) me.eps_min = parse_number<double>("method.eps_min", *v);
  if (auto v = get("method.kernel")) {
    const std::string k = trim(*v);
    if (k == "gaussian")
      me.kernel.kind = KernelKind::Gaussian;
    else if (k == "polynomial")
      me.kernel.kind = KernelKind::Polynomial;
    else
      bad("method.kernel", "unknown kernel '" + *v + "'");
  }
  if (auto v = get("method.c")) me.kernel.c = parse_number<double>("method.c", *v);
  if (auto v = get("method.d")) me.kernel.d = parse_number<int>("method.d", *v);
  if (auto v = get("method.inner_max_sweeps")) me.inner_max_sweeps = parse_number<int>("method.inner_max_sweeps", *v);
  if (auto v = get("method.delta_min")) me.delta_min = parse_number<double>("method.delta_min", *v);

  auto& bo = cfg.bounds;
  if (auto v = get("bounds.m")) bo.m = parse_number<int>("bounds.m", *v);
  if (auto v = get("bounds.omega_size")) bo.omega_sizes = parse_list<int>("bounds.omega_size", *v);
  if (auto v = get("bounds.delta")) bo.deltas = parse_list<double>("bounds.delta", *v);
  if (auto v = get("bounds.trials")) bo.trials = parse_number<int>("bounds.trials", *v);
  if (auto v = get("bounds.pairs")) {
    const std::string p = trim(*v);
    if (p == "gaussian")
      bo.pairs = PairKind::Gaussian;
    else if (p == "rademacher")
      bo.pairs = PairKind::Rademacher;
    else
      bad("bounds.pairs", "unknown pair model '" + *v + "'");
  }
  if (auto v = get("bounds.gaussian_c")) bo.gaussian_c = parse_number<double>("bounds.gaussian_c", *v);
  if (auto v = get("bounds.poly_c")) bo.poly_c = parse_number<double>("bounds.poly_c", *v);
  if (auto v = get("bounds.poly_d")) bo.poly_d = parse_number<int>("bounds.poly_d", *v);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void ExperimentConfig::validate() const {
  if (trials < 1) bad("run.trials", "must be at least 1");
  if (jobs < 0) bad("run.jobs", "must be non-negative");
  if (run_id.empty() || run_id.find_first_of(",\n") != std::string::npos) bad("run.run_id", "must be non-empty without commas");

  if (mode == Mode::BoundsCheck) {
    if (bounds.m < 1) bad("bounds.m", "must be positive");
    for (int n : bounds.omega_sizes)
      if (n < 1) bad("bounds.omega_size", "must be positive");
    for (double d : bounds.deltas)
      if (!(d > 0.0 && d < 0.5)) bad("bounds.delta", "must lie in (0, 0.5)");
    if (bounds.trials < 1) bad("bounds.trials", "must be at least 1");
    if (bounds.gaussian_c <= 0.0) bad("bounds.gaussian_c", "must be positive");
    if (bounds.poly_d < 1 || bounds.poly_d % 2 == 0) bad("bounds.poly_d", "must be odd and positive");
    return;
  }

  const Method m = method.method;
  const auto allowed = [&]() -> bool {
    switch (mode) {
      case Mode::SynthMcuos: return m == Method::Micusal || m == Method::Amicusal;
      case Mode::SynthRmcuos: return m == Method::Rmicusal;
      case Mode::Mckuos: return m == Method::Mckusal;
      case Mode::Rmckuos: return m == Method::Rmckusal;
      default: return true;
    }
  }();
  if (!allowed) bad("method.name", std::string(to_string(m)) + " does not fit mode " + std::string(to_string(mode)));

  const bool synthetic_source = mode == Mode::SynthMcuos || mode == Mode::SynthRmcuos || data.train.empty();
  if ((mode == Mode::SynthMcuos || mode == Mode::SynthRmcuos) && !data.train.empty())
    bad("data.train", "synthetic modes generate their own data");
  if (synthetic_source) {
    try {
      synthetic.validate();
    } catch (const Error& e) {
      bad("synthetic", e.what());
    }
  }
  if (mode == Mode::Cluster && !synthetic_source && data.labels.empty()) bad("data.labels", "cluster mode needs labels");
  if (mode == Mode::Denoise && !synthetic_source && data.test_clean.empty())
    bad("data.test_clean", "denoise mode needs clean test signals");
  for (double s : sigma_te_sq)
    if (!(s >= 0.0)) bad("synthetic.sigma_te_sq", "must be non-negative");
  for (double f : data.missing_fracs)
    if (!(f >= 0.0 && f < 1.0)) bad("data.missing_frac", "must lie in [0, 1)");
  if (!uses_partial_data(m))
    for (double f : data.missing_fracs)
      if (f != 0.0) bad("data.missing_frac", std::string(to_string(m)) + " needs complete data");

  for (double l : method.lambdas)
    if (!(l > 0.0)) bad("method.lambda", "must be positive");
  if (method.L < 1) bad("method.L", "must be positive");
  if (method.s < 1) bad("method.s", "must be positive");
  if (method.restarts < 1) bad("method.restarts", "must be at least 1");
  if (method.max_outer_iters < 1) bad("method.max_outer_iters", "must be at least 1");
  if (!(method.rel_tol >= 0.0)) bad("method.rel_tol", "must be non-negative");
  if (!(method.eta > 0.0)) bad("method.eta", "must be positive");
  if (method.inner_iters < 1) bad("method.inner_iters", "must be at least 1");
  if (method.reorth_every < 1) bad("method.reorth_every", "must be at least 1");
  if (m == Method::Amicusal) {
    if (method.L_max < 1) bad("method.L_max", "must be positive");
    if (method.s_max < 1) bad("method.s_max", "must be positive");
    if (method.k1 < 3) bad("method.k1", "must be at least 3");
    if (method.k2 < method.k1) bad("method.k2", "must be at least k1");
    if (!(method.eps_min >= 0.0 && method.eps_min < 1.0)) bad("method.eps_min", "must lie in [0, 1)");
  }
  if (is_kernel_method(m)) {
    try {
      method.kernel.validate();
    } catch (const Error& e) {
      bad("method.kernel", e.what());
    }
    if (m == Method::Rmckusal && method.kernel.kind == KernelKind::Polynomial && method.kernel.d % 2 == 0)
      bad("method.d", "missing-data kernels need an odd degree");
    if (method.inner_max_sweeps < 1) bad("method.inner_max_sweeps", "must be at least 1");
    if (!(method.delta_min > 0.0)) bad("method.delta_min", "must be positive");
  }
}

std::vector<std::string> ExperimentConfig::describe() const {
  std::vector<std::string> out;
  auto add = [&](const std::string& key, const std::string& value) { out.push_back(key + " = " + value); };
  add("run.mode", std::string(to_string(mode)));
  add("run.run_id", run_id);
  add("run.seed", std::to_string(seed));
  if (mode == Mode::BoundsCheck) {
    add("bounds.m", std::to_string(bounds.m));
    add("bounds.omega_size", join(bounds.omega_sizes));
    add("bounds.delta", join(bounds.deltas));
    add("bounds.trials", std::to_string(bounds.trials));
    add("bounds.pairs", bounds.pairs == PairKind::Gaussian ? "gaussian" : "rademacher");
    add("bounds.gaussian_c", num(bounds.gaussian_c));
    add("bounds.poly_c", num(bounds.poly_c));
    add("bounds.poly_d", std::to_string(bounds.poly_d));
    return out;
  }
  add("run.trials", std::to_string(trials));
  if (uses_file_data()) {
    add("data.train", data.train);
    add("data.labels", data.labels);
    add("data.test_clean", data.test_clean);
    add("data.signals_in_rows", data.signals_in_rows ? "true" : "false");
    add("data.normalize", data.normalize ? "true" : "false");
  } else {
    add("synthetic.m", std::to_string(synthetic.m));
    add("synthetic.s", std::to_string(synthetic.s));
    add("synthetic.L", std::to_string(synthetic.L));
    add("synthetic.t_s", num(synthetic.t_s));
    add("synthetic.cluster_sizes", join(synthetic.cluster_sizes));
    add("synthetic.sigma_tr_sq", num(synthetic.sigma_tr_sq));
  }
  add("synthetic.sigma_te_sq", join(sigma_te_sq));
  add("data.missing_frac", join(data.missing_fracs));
  const auto& me = method;
  add("method.name", std::string(to_string(me.method)));
  add("method.lambda", join(me.lambdas));
  if (me.method == Method::Amicusal) {
    add("method.L_max", std::to_string(me.L_max));
    add("method.s_max", std::to_string(me.s_max));
    add("method.k1", std::to_string(me.k1));
    add("method.k2", std::to_string(me.k2));
    add("method.eps_min", num(me.eps_min));
  } else {
    add("method.L", std::to_string(me.L));
    add("method.s", std::to_string(me.s));
  }
  add("method.max_outer_iters", std::to_string(me.max_outer_iters));
  add("method.rel_tol", num(me.rel_tol));
  if (!is_kernel_method(me.method)) add("method.restarts", std::to_string(me.restarts));
  if (me.method == Method::Rmicusal) {
    add("method.eta", num(me.eta));
    add("method.inner_iters", std::to_string(me.inner_iters));
    add("method.reorth_every", std::to_string(me.reorth_every));
  }
  if (is_kernel_method(me.method)) {
    add("method.kernel", me.kernel.describe());
    add("method.inner_max_sweeps", std::to_string(me.inner_max_sweeps));
    add("method.delta_min", num(me.delta_min));
  }
  return out;
}

std::string config_reference() {
  std::ostringstream out;
  std::string section;
  for (const auto& k : kKeys) {
    const std::string key = k.key;
    const std::string sec = key.substr(0, key.find('.'));
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
      section = sec;
    }
    out << "  " << key.substr(key.find('.') + 1) << " = " << k.fallback << "    ; " << k.help << '\n';
  }
  return out.str();
}

}  // namespace mcuos
