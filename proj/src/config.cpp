#include "streamsift/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <type_traits>

namespace streamsift {

namespace {

/// Reads one JSON object, tracking which keys were consumed so leftovers can be rejected.
class Section {
public:
    Section(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError("expected an object", path_.empty() ? "<root>" : path_);
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json& raw(const std::string& key) {
        if (!node_.contains(key)) throw ConfigError("missing required key", field(key));
        seen_.insert(key);
        return node_.at(key);
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        return has(key) ? convert<T>(raw(key), field(key)) : fallback;
    }

    template <typename T>
    T require(const std::string& key) {
        return convert<T>(raw(key), field(key));
    }

    template <typename T>
    std::optional<T> optional(const std::string& key) {
        if (!has(key) || node_.at(key).is_null()) {
            if (has(key)) seen_.insert(key);
            return std::nullopt;
        }
        return convert<T>(raw(key), field(key));
    }

    Section child(const std::string& key) {
        static const Json empty = Json::object();
        return has(key) ? Section(raw(key), field(key)) : Section(empty, field(key));
    }

    /// Rejects keys that were never read.
    void finish() const {
        for (const auto& item : node_.items())
            if (!seen_.count(item.key())) throw ConfigError("unknown key", field(item.key()));
    }

    template <typename T>
    static T convert(const Json& v, const std::string& where);

private:
    const Json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

template <>
double Section::convert<double>(const Json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("expected a number", where);
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("expected a finite number", where);
    return d;
}

// std::size_t and std::uint64_t are the same type on the supported platforms.
static_assert(std::is_same_v<std::size_t, std::uint64_t>);

template <>
std::uint64_t Section::convert<std::uint64_t>(const Json& v, const std::string& where) {
    if (!v.is_number_unsigned()) {
        if (v.is_number_integer()) throw ConfigError("expected a non-negative integer", where);
        throw ConfigError("expected an integer", where);
    }
    return v.get<std::uint64_t>();
}

template <>
int Section::convert<int>(const Json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError("expected an integer", where);
    return v.get<int>();
}

template <>
bool Section::convert<bool>(const Json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError("expected true or false", where);
    return v.get<bool>();
}

template <>
std::string Section::convert<std::string>(const Json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError("expected a string", where);
    return v.get<std::string>();
}

template <>
std::vector<std::uint64_t> Section::convert<std::vector<std::uint64_t>>(const Json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("expected an array", where);
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<std::uint64_t>(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

template <>
std::vector<double> Section::convert<std::vector<double>>(const Json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("expected an array", where);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert<double>(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

void check(bool ok, const std::string& message, const std::string& field) {
    if (!ok) throw ConfigError(message, field);
}

void check_fraction(double v, const std::string& field) { check(v >= 0.0 && v < 1.0, "must lie in [0, 1)", field); }

DatasetSpec parse_dataset(Section s) {
    DatasetSpec d;
    d.source = s.get<std::string>("source", d.source);
    if (d.source == "synth_blobs") {
        d.num_classes = s.get("num_classes", d.num_classes);
        d.per_class = s.get("per_class", d.per_class);
        d.dim = s.get("dim", d.dim);
        d.spread = s.get("spread", d.spread);
        d.seed = s.get("seed", d.seed);
        check(d.num_classes >= 2, "need at least 2 classes", s.field("num_classes"));
        check(d.per_class >= 1, "must be positive", s.field("per_class"));
        check(d.dim >= 1, "must be positive", s.field("dim"));
        check(d.spread >= 0.0, "must be non-negative", s.field("spread"));
    } else if (d.source == "csv") {
        d.path = s.require<std::string>("path");
        d.label_column = s.get("label_column", d.label_column);
        d.header = s.get("header", d.header);
    } else if (d.source == "idx") {
        d.images = s.require<std::string>("images");
        d.labels = s.require<std::string>("labels");
    } else {
        throw ConfigError("unknown dataset source \"" + d.source + "\" (expected synth_blobs, csv or idx)",
                          s.field("source"));
    }
    d.test_fraction = s.get("test_fraction", d.test_fraction);
    d.target_fraction = s.get("target_fraction", d.target_fraction);
    check_fraction(d.test_fraction, s.field("test_fraction"));
    check_fraction(d.target_fraction, s.field("target_fraction"));
    check(d.test_fraction + d.target_fraction < 1.0, "test and target fractions leave no stream data",
          s.field("target_fraction"));
    s.finish();
    return d;
}

StreamSpec parse_stream(Section s) {
    StreamSpec st;
    if (s.has("kind")) st.kind = parse_nonstationarity(s.require<std::string>("kind"));
    st.dataset = parse_dataset(s.child("dataset"));
    st.steps = s.get("steps", st.steps);
    check(st.steps >= 1, "need at least one step", s.field("steps"));
    st.per_step = s.optional<std::size_t>("per_step");
    if (st.per_step) check(*st.per_step >= 1, "must be positive", s.field("per_step"));
    st.shuffle_classes = s.get("shuffle_classes", st.shuffle_classes);
    st.seed = s.optional<std::uint64_t>("seed");
    s.finish();
    return st;
}

ModelSpec parse_model(Section s) {
    ModelSpec m;
    m.kind = s.get<std::string>("kind", m.kind);
    Section h = s.child("hyperparameters");
    if (m.kind == "forest") {
        m.max_depth = h.get("max_depth", m.max_depth);
        m.min_leaf = h.get("min_leaf", m.min_leaf);
        m.smoothing = h.get("smoothing", m.smoothing);
        m.features_per_split = h.get("features_per_split", m.features_per_split);
        m.bootstrap = h.get("bootstrap", m.bootstrap);
        check(m.min_leaf >= 1, "must be positive", h.field("min_leaf"));
        check(m.smoothing > 0.0, "must be positive", h.field("smoothing"));
    } else if (m.kind == "mlp") {
        m.hidden = h.get("hidden", m.hidden);
        m.dropout = h.get("dropout", m.dropout);
        for (auto width : m.hidden) check(width >= 1, "layer widths must be positive", h.field("hidden"));
        check(m.dropout >= 0.0 && m.dropout < 1.0, "must lie in [0, 1)", h.field("dropout"));
    } else if (m.kind == "dirichlet") {
        m.lower = h.get("lower", m.lower);
        m.upper = h.get("upper", m.upper);
        m.bins_per_dim = h.get("bins_per_dim", m.bins_per_dim);
        m.alpha0 = h.get("alpha0", m.alpha0);
        check(m.lower.size() == m.upper.size(), "lower and upper must have the same length", h.field("upper"));
        check(m.bins_per_dim >= 1, "must be positive", h.field("bins_per_dim"));
        check(m.alpha0 > 0.0, "must be positive", h.field("alpha0"));
    } else {
        throw ConfigError("unknown model kind \"" + m.kind + "\" (expected forest, mlp or dirichlet)", s.field("kind"));
    }
    h.finish();
    s.finish();
    return m;
}

ObjectiveSpec parse_objective_spec(Section s) {
    ObjectiveSpec o;
    if (s.has("name")) {
        const Json& name = s.raw("name");
        const std::string where = s.field("name");
        std::vector<std::string> names;
        if (name.is_string()) {
            names.push_back(name.get<std::string>());
        } else if (name.is_array() && !name.empty()) {
            for (const auto& n : name) names.push_back(Section::convert<std::string>(n, where));
        } else {
            throw ConfigError("expected an objective name or a non-empty list of names", where);
        }
        o.names.clear();
        for (const auto& n : names) {
            const Objective obj = parse_objective(n);
            for (auto prev : o.names) check(prev != obj, "objective \"" + n + "\" listed twice", where);
            o.names.push_back(obj);
        }
    }
    o.eta = s.get("eta", o.eta);
    s.finish();
    return o;
}

StoreSpec parse_store(Section s) {
    StoreSpec st;
    if (s.has("strategy")) st.strategy = parse_strategy(s.require<std::string>("strategy"));
    st.m = s.get("m", st.m);
    st.quota = s.optional<std::size_t>("quota");
    st.tau = s.get("tau", st.tau);
    check(st.m >= 1, "must be positive", s.field("m"));
    check(st.tau >= 1, "must be at least 1", s.field("tau"));
    if (st.quota) check(*st.quota >= 1, "must be positive", s.field("quota"));
    s.finish();
    return st;
}

TargetSpec parse_targets(Section s) {
    TargetSpec t;
    t.source = s.get<std::string>("source", t.source);
    if (t.source == "fixed") {
        t.path = s.require<std::string>("path");
    } else if (t.source != "global" && t.source != "seen_so_far") {
        throw ConfigError("unknown target source \"" + t.source + "\" (expected global, seen_so_far or fixed)",
                          s.field("source"));
    }
    t.M = s.get("M", t.M);
    check(t.M >= 1, "must be positive", s.field("M"));
    s.finish();
    return t;
}

}  // namespace

RunConfig parse_config(const Json& doc, std::optional<std::uint64_t> default_seed) {
    Section root(doc, "");
    RunConfig c;
    c.stream = parse_stream(root.child("stream"));
    c.model = parse_model(root.child("model"));
    c.objective = parse_objective_spec(root.child("objective"));
    c.store = parse_store(root.child("store"));
    c.targets = parse_targets(root.child("targets"));
    {
        Section s = root.child("sampling");
        c.sampling.K = s.optional<std::size_t>("K");
        if (c.sampling.K) check(*c.sampling.K >= 1, "must be positive", "sampling.K");
        s.finish();
    }
    {
        Section s = root.child("training");
        auto& t = c.training;
        t.lr = s.get("lr", t.lr);
        t.max_steps = s.get("max_steps", t.max_steps);
        t.weight_decay = s.get("weight_decay", t.weight_decay);
        t.val_fraction = s.get("val_fraction", t.val_fraction);
        t.refit_every = s.get("refit_every", t.refit_every);
        check(t.lr > 0.0, "must be positive", "training.lr");
        check(t.weight_decay >= 0.0, "must be non-negative", "training.weight_decay");
        check_fraction(t.val_fraction, "training.val_fraction");
        check(t.refit_every >= 1, "must be at least 1", "training.refit_every");
        s.finish();
    }
    if (root.has("seeds")) {
        c.seeds = root.require<std::vector<std::uint64_t>>("seeds");
        check(!c.seeds.empty(), "need at least one seed", "seeds");
        std::set<std::uint64_t> unique(c.seeds.begin(), c.seeds.end());
        check(unique.size() == c.seeds.size(), "seeds must be distinct", "seeds");
    } else if (default_seed) {
        c.seeds = {*default_seed};
    }
    {
        Section s = root.child("output");
        c.output_dir = s.get<std::string>("dir", c.output_dir);
        s.finish();
    }
    root.finish();

    if (!c.store.quota)
        check(c.store.m % c.stream.steps == 0,
              "m = " + std::to_string(c.store.m) + " is not divisible by " + std::to_string(c.stream.steps) +
                  " steps; set store.quota explicitly",
              "store.m");
    check(c.quota() * c.stream.steps <= c.store.m, "quota * steps exceeds the store size m", "store.quota");
    return c;
}

RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> default_seed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string(), "<file>");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what(), "<file>");
    }
    return parse_config(doc, default_seed);
}

Json config_to_json(const RunConfig& c) {
    Json dataset;
    const auto& d = c.stream.dataset;
    dataset["source"] = d.source;
    if (d.source == "synth_blobs") {
        dataset["num_classes"] = d.num_classes;
        dataset["per_class"] = d.per_class;
        dataset["dim"] = d.dim;
        dataset["spread"] = d.spread;
        dataset["seed"] = d.seed;
    } else if (d.source == "csv") {
        dataset["path"] = d.path;
        dataset["label_column"] = d.label_column;
        dataset["header"] = d.header;
    } else {
        dataset["images"] = d.images;
        dataset["labels"] = d.labels;
    }
    dataset["test_fraction"] = d.test_fraction;
    dataset["target_fraction"] = d.target_fraction;

    Json stream;
    stream["kind"] = std::string(nonstationarity_name(c.stream.kind));
    stream["dataset"] = dataset;
    stream["steps"] = c.stream.steps;
    stream["per_step"] = c.stream.per_step ? Json(*c.stream.per_step) : Json(nullptr);
    stream["shuffle_classes"] = c.stream.shuffle_classes;
    stream["seed"] = c.stream.seed ? Json(*c.stream.seed) : Json(nullptr);

    Json hyper = Json::object();
    const auto& m = c.model;
    if (m.kind == "forest") {
        hyper["max_depth"] = m.max_depth;
        hyper["min_leaf"] = m.min_leaf;
        hyper["smoothing"] = m.smoothing;
        hyper["features_per_split"] = m.features_per_split;
        hyper["bootstrap"] = m.bootstrap;
    } else if (m.kind == "mlp") {
        hyper["hidden"] = m.hidden;
        hyper["dropout"] = m.dropout;
    } else {
        hyper["lower"] = m.lower;
        hyper["upper"] = m.upper;
        hyper["bins_per_dim"] = m.bins_per_dim;
        hyper["alpha0"] = m.alpha0;
    }

    Json names = Json::array();
    for (auto o : c.objective.names) names.push_back(std::string(objective_name(o)));

    Json out;
    out["stream"] = stream;
    out["model"] = {{"kind", m.kind}, {"hyperparameters", hyper}};
    out["objective"] = {{"name", names.size() == 1 ? names[0] : names}, {"eta", c.objective.eta}};
    out["store"] = {{"strategy", std::string(strategy_name(c.store.strategy))},
                    {"m", c.store.m},
                    {"quota", c.store.quota ? Json(*c.store.quota) : Json(nullptr)},
                    {"tau", c.store.tau}};
    Json targets = {{"source", c.targets.source}, {"M", c.targets.M}};
    if (c.targets.source == "fixed") targets["path"] = c.targets.path;
    out["targets"] = targets;
    out["sampling"] = {{"K", c.sampling.K ? Json(*c.sampling.K) : Json(nullptr)}};
    out["training"] = {{"lr", c.training.lr},
                       {"max_steps", c.training.max_steps},
                       {"weight_decay", c.training.weight_decay},
                       {"val_fraction", c.training.val_fraction},
                       {"refit_every", c.training.refit_every}};
    out["seeds"] = c.seeds;
    out["output"] = {{"dir", c.output_dir}};
    return out;
}

void apply_override(Json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like dotted.path=value, got \"" + assignment + "\"", "<override>");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }
    Json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("empty path component", path);
        if (!node->is_object()) throw ConfigError("cannot descend into a non-object", path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = Json::object();
        start = dot + 1;
    }
}

}  // namespace streamsift
