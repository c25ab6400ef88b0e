#include "taco/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace taco {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <typename T>
std::string fmt_opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return fmt(*v);
  } else {
    return std::to_string(*v);
  }
}

template <typename T>
T parse_num(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(key + ": '" + value + "' is not a valid number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw ConfigError(key + ": must be finite");
  }
  return out;
}

template <typename T>
std::optional<T> parse_opt(const std::string& key, const std::string& value) {
  if (value.empty()) return std::nullopt;
  return parse_num<T>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::vector<int> parse_cutoffs(const std::string& key,
                               const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  for (std::string part; std::getline(ss, part, ',');) {
    out.push_back(parse_num<int>(key, trim(part)));
  }
  if (out.empty()) throw ConfigError(key + ": at least one cutoff required");
  for (int c : out) {
    if (c < 1) throw ConfigError(key + ": cutoffs must be >= 1");
  }
  return out;
}

std::string expand(const std::string& key,
                   const std::map<std::string, std::string>& kv) {
  std::string value = kv.at(key);
  for (int depth = 0; depth < 16; ++depth) {
    const auto open = value.find("${");
    if (open == std::string::npos) return value;
    const auto close = value.find('}', open);
    if (close == std::string::npos) {
      throw ConfigError(key + ": unterminated ${ reference");
    }
    const std::string ref = value.substr(open + 2, close - open - 2);
    auto it = kv.find(ref);
    if (it == kv.end()) {
      throw ConfigError(key + ": reference to unknown key '" + ref + "'");
    }
    value.replace(open, close - open + 1, it->second);
  }
  throw ConfigError(key + ": ${} references nest too deeply");
}

}  // namespace

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kTaco:
      return "taco";
    case TrainMode::kTacoPlus:
      return "taco_plus";
    case TrainMode::kFactored:
      return "factored";
  }
  return "taco";
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << h;
  return ss.str();
}

std::map<std::string, std::string> RunConfig::to_kv() const {
  std::map<std::string, std::string> kv;
  kv["data.raw_ratings"] = raw_ratings;
  kv["data.raw_terms"] = raw_terms;
  kv["data.ratings"] = ratings;
  kv["data.train"] = train;
  kv["data.validation"] = validation;
  kv["data.test"] = test;
  kv["data.test_items"] = test_items;
  kv["data.features"] = features;
  kv["data.similarity"] = similarity;

  kv["binarize.enabled"] = fmt_bool(binarize);
  kv["binarize.threshold"] = fmt(rule.positive_threshold);
  kv["binarize.strict"] = fmt_bool(rule.strict);
  kv["binarize.min"] = fmt_opt(rule.min_value);
  kv["binarize.max"] = fmt_opt(rule.max_value);
  kv["tfidf.min_items"] = std::to_string(tfidf_min_items);
  kv["tfidf.max_frac"] = fmt(tfidf_max_frac);
  kv["similarity.knn"] = std::to_string(similarity_knn);

  kv["split.mode"] =
      split.mode == SplitSpec::Mode::kRatings ? "ratings" : "items";
  kv["split.train"] = fmt(split.train);
  kv["split.validation"] = fmt(split.validation);
  kv["split.test"] = fmt(split.test);
  kv["split.folds"] = fmt_opt(split.folds);
  kv["split.seed"] = std::to_string(split.seed);

  kv["train.mode"] = to_string(mode);
  kv["train.lambda"] = fmt(hp.lambda);
  kv["train.gamma"] = fmt(hp.gamma);
  kv["train.step.schedule"] =
      hp.step.kind == StepSchedule::Kind::kConstant ? "constant" : "inv_sqrt";
  kv["train.step.eta0"] = fmt(hp.step.eta0);
  kv["train.step.auto"] = fmt_bool(auto_step);
  kv["train.max_iters"] = std::to_string(hp.max_iters);
  kv["train.tol"] = fmt(hp.tol);
  kv["train.rank"] = fmt_opt(hp.rank);
  kv["train.unrated_sample"] = fmt_opt(hp.unrated_sample);
  kv["train.user_batch"] = fmt_opt(hp.user_batch);
  kv["train.seed"] = std::to_string(hp.seed);
  kv["train.init_sigma"] = fmt(hp.init_sigma);
  kv["train.semi_supervised"] = fmt_bool(hp.semi_supervised);

  kv["eval.protocol"] = protocol == Protocol::kWarm ? "warm" : "cold";
  std::string cuts;
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    cuts += (i ? "," : "") + std::to_string(cutoffs[i]);
  }
  kv["eval.cutoffs"] = cuts;
  kv["eval.recall"] = recall == RecallMode::kListSize ? "list_size" : "relevant";

  kv["synth.n_users"] = std::to_string(synth.n_users);
  kv["synth.n_items"] = std::to_string(synth.n_items);
  kv["synth.dim"] = std::to_string(synth.dim);
  kv["synth.true_rank"] = std::to_string(synth.true_rank);
  kv["synth.obs_frac"] = fmt(synth.obs_frac);
  kv["synth.bias"] = fmt(synth.bias);
  kv["synth.seed"] = std::to_string(synth.seed);

  kv["output.dir"] = output_dir;
  return kv;
}

RunConfig RunConfig::from_kv(const std::map<std::string, std::string>& input) {
  RunConfig c;
  std::map<std::string, std::string> kv = c.to_kv();
  for (const auto& [key, value] : input) {
    if (!kv.count(key)) throw ConfigError("unknown config key '" + key + "'");
    kv[key] = value;
  }
  std::map<std::string, std::string> v;
  for (const auto& [key, value] : kv) v[key] = expand(key, kv);

  c.raw_ratings = v["data.raw_ratings"];
  c.raw_terms = v["data.raw_terms"];
  c.ratings = v["data.ratings"];
  c.train = v["data.train"];
  c.validation = v["data.validation"];
  c.test = v["data.test"];
  c.test_items = v["data.test_items"];
  c.features = v["data.features"];
  c.similarity = v["data.similarity"];

  c.binarize = parse_bool("binarize.enabled", v["binarize.enabled"]);
  c.rule.positive_threshold =
      parse_num<double>("binarize.threshold", v["binarize.threshold"]);
  c.rule.strict = parse_bool("binarize.strict", v["binarize.strict"]);
  c.rule.min_value = parse_opt<double>("binarize.min", v["binarize.min"]);
  c.rule.max_value = parse_opt<double>("binarize.max", v["binarize.max"]);
  c.tfidf_min_items = parse_num<int>("tfidf.min_items", v["tfidf.min_items"]);
  c.tfidf_max_frac = parse_num<double>("tfidf.max_frac", v["tfidf.max_frac"]);
  c.similarity_knn = parse_num<int>("similarity.knn", v["similarity.knn"]);
  if (c.similarity_knn < 1) throw ConfigError("similarity.knn must be >= 1");

  const std::string& mode = v["split.mode"];
  if (mode == "ratings") {
    c.split.mode = SplitSpec::Mode::kRatings;
  } else if (mode == "items") {
    c.split.mode = SplitSpec::Mode::kItems;
  } else {
    throw ConfigError("split.mode must be 'ratings' or 'items'");
  }
  c.split.train = parse_num<double>("split.train", v["split.train"]);
  c.split.validation =
      parse_num<double>("split.validation", v["split.validation"]);
  c.split.test = parse_num<double>("split.test", v["split.test"]);
  c.split.folds = parse_opt<int>("split.folds", v["split.folds"]);
  c.split.seed = parse_num<std::uint64_t>("split.seed", v["split.seed"]);
  c.split.validate();

  const std::string& tm = v["train.mode"];
  if (tm == "taco") {
    c.mode = TrainMode::kTaco;
  } else if (tm == "taco_plus") {
    c.mode = TrainMode::kTacoPlus;
  } else if (tm == "factored") {
    c.mode = TrainMode::kFactored;
  } else {
    throw ConfigError("train.mode must be taco, taco_plus or factored");
  }
  c.hp.lambda = parse_num<double>("train.lambda", v["train.lambda"]);
  c.hp.gamma = parse_num<double>("train.gamma", v["train.gamma"]);
  const std::string& sched = v["train.step.schedule"];
  if (sched == "constant") {
    c.hp.step.kind = StepSchedule::Kind::kConstant;
  } else if (sched == "inv_sqrt") {
    c.hp.step.kind = StepSchedule::Kind::kInvSqrt;
  } else {
    throw ConfigError("train.step.schedule must be constant or inv_sqrt");
  }
  c.hp.step.eta0 = parse_num<double>("train.step.eta0", v["train.step.eta0"]);
  c.auto_step = parse_bool("train.step.auto", v["train.step.auto"]);
  c.hp.max_iters = parse_num<int>("train.max_iters", v["train.max_iters"]);
  c.hp.tol = parse_num<double>("train.tol", v["train.tol"]);
  c.hp.rank = parse_opt<int>("train.rank", v["train.rank"]);
  c.hp.unrated_sample =
      parse_opt<int>("train.unrated_sample", v["train.unrated_sample"]);
  c.hp.user_batch = parse_opt<int>("train.user_batch", v["train.user_batch"]);
  c.hp.seed = parse_num<std::uint64_t>("train.seed", v["train.seed"]);
  c.hp.init_sigma =
      parse_num<double>("train.init_sigma", v["train.init_sigma"]);
  c.hp.semi_supervised =
      parse_bool("train.semi_supervised", v["train.semi_supervised"]);
  c.hp.validate();

  const std::string& protocol = v["eval.protocol"];
  if (protocol == "warm") {
    c.protocol = Protocol::kWarm;
  } else if (protocol == "cold") {
    c.protocol = Protocol::kCold;
  } else {
    throw ConfigError("eval.protocol must be warm or cold");
  }
  c.cutoffs = parse_cutoffs("eval.cutoffs", v["eval.cutoffs"]);
  const std::string& recall = v["eval.recall"];
  if (recall == "list_size") {
    c.recall = RecallMode::kListSize;
  } else if (recall == "relevant") {
    c.recall = RecallMode::kRelevant;
  } else {
    throw ConfigError("eval.recall must be list_size or relevant");
  }

  c.synth.n_users = parse_num<int>("synth.n_users", v["synth.n_users"]);
  c.synth.n_items = parse_num<int>("synth.n_items", v["synth.n_items"]);
  c.synth.dim = parse_num<int>("synth.dim", v["synth.dim"]);
  c.synth.true_rank = parse_num<int>("synth.true_rank", v["synth.true_rank"]);
  c.synth.obs_frac = parse_num<double>("synth.obs_frac", v["synth.obs_frac"]);
  c.synth.bias = parse_num<double>("synth.bias", v["synth.bias"]);
  c.synth.seed = parse_num<std::uint64_t>("synth.seed", v["synth.seed"]);

  c.output_dir = v["output.dir"];
  if (c.output_dir.empty()) c.output_dir = ".";
  return c;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [key, value] : to_kv()) {
    out += key + " = " + value + "\n";
  }
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::string text;
  for (const auto& [key, value] : to_kv()) {
    if (key == "output.dir") continue;
    text += key + " = " + value + "\n";
  }
  return fnv1a(text);
}

std::map<std::string, std::string> parse_kv(const std::string& text,
                                            const std::string& source) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string t = trim(line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

RunConfig load_config(const std::filesystem::path& file,
                      const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> kv;
  if (!file.empty()) {
    std::string text;
    try {
      text = read_file(file);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    kv = parse_kv(text, file.string());
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + o + "' is not key=value");
    }
    kv[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
  }
  return RunConfig::from_kv(kv);
}

}  // namespace taco
