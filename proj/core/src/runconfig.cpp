#include "cfl/runconfig.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cfl/errors.hpp"

namespace cfl {

namespace {

using njson = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

double want_num(const njson& v, const std::string& path) {
    if (!v.is_number()) bad(path, "expected a number");
    return v.get<double>();
}

long want_int(const njson& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) bad(path, "expected an integer");
    return v.get<long>();
}

bool want_bool(const njson& v, const std::string& path) {
    if (!v.is_boolean()) bad(path, "expected true or false");
    return v.get<bool>();
}

std::string want_str(const njson& v, const std::string& path) {
    if (!v.is_string()) bad(path, "expected a string");
    return v.get<std::string>();
}

void parse_hyper(const njson& j, const std::string& at, Hyper& h) {
    if (!j.is_object()) bad(at, "expected an object");
    for (const auto& [key, v] : j.items()) {
        const std::string p = at + "." + key;
        if (key == "lambda") {
            h.lambda = want_num(v, p);
        } else if (key == "mu") {
            h.mu = want_num(v, p);
        } else if (key == "m") {
            h.m = want_int(v, p);
        } else if (key == "mu_decay") {
            if (!v.is_array()) bad(p, "expected an array of {epoch, factor}");
            h.mu_decay.clear();
            long idx = 0;
            for (const auto& step : v) {
                const std::string sp = p + "[" + std::to_string(idx++) + "]";
                if (!step.is_object()) bad(sp, "expected an object");
                MuStep ms;
                bool saw_epoch = false, saw_factor = false;
                for (const auto& [sk, sv] : step.items()) {
                    if (sk == "epoch") {
                        ms.epoch = static_cast<int>(want_int(sv, sp + ".epoch"));
                        saw_epoch = true;
                    } else if (sk == "factor") {
                        ms.factor = want_num(sv, sp + ".factor");
                        saw_factor = true;
                    } else {
                        bad(sp + "." + sk, "unknown key");
                    }
                }
                if (!saw_epoch || !saw_factor) bad(sp, "need both epoch and factor");
                h.mu_decay.push_back(ms);
            }
        } else {
            bad(p, "unknown key");
        }
    }
}

void parse_device_classes(const njson& j, const std::string& at, std::vector<DeviceClassSpec>& out) {
    if (!j.is_array()) bad(at, "expected an array of device classes");
    out.clear();
    long idx = 0;
    for (const auto& cls : j) {
        const std::string p = at + "[" + std::to_string(idx++) + "]";
        if (!cls.is_object()) bad(p, "expected an object");
        DeviceClassSpec spec;
        for (const auto& [key, v] : cls.items()) {
            if (key == "count")
                spec.count = static_cast<int>(want_int(v, p + ".count"));
            else if (key == "mac_rate")
                spec.mac_rate = want_num(v, p + ".mac_rate");
            else if (key == "setup_frac")
                spec.setup_frac = want_num(v, p + ".setup_frac");
            else if (key == "p_fail")
                spec.p_fail = want_num(v, p + ".p_fail");
            else
                bad(p + "." + key, "unknown key");
        }
        out.push_back(spec);
    }
}

void parse_data(const njson& j, const std::string& at, DataConfig& d) {
    if (!j.is_object()) bad(at, "expected an object");
    for (const auto& [key, v] : j.items()) {
        const std::string p = at + "." + key;
        if (key == "source")
            d.source = want_str(v, p);
        else if (key == "m")
            d.m = want_int(v, p);
        else if (key == "classes")
            d.classes = static_cast<int>(want_int(v, p));
        else if (key == "raw_dim")
            d.raw_dim = static_cast<int>(want_int(v, p));
        else if (key == "noise")
            d.noise = want_num(v, p);
        else if (key == "test_fraction")
            d.test_fraction = want_num(v, p);
        else if (key == "csv_path")
            d.csv_path = want_str(v, p);
        else if (key == "idx_images")
            d.idx_images = want_str(v, p);
        else if (key == "idx_labels")
            d.idx_labels = want_str(v, p);
        else
            bad(p, "unknown key");
    }
}

} // namespace

ConfigFile parse_config(const std::string& text) {
    njson j;
    try {
        j = njson::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    ConfigFile out;
    RunConfig& cfg = out.run;
    for (const auto& [key, v] : j.items()) {
        const std::string p = key;
        if (key == "D") {
            cfg.D = static_cast<int>(want_int(v, p));
        } else if (key == "alpha") {
            cfg.alpha = static_cast<int>(want_int(v, p));
        } else if (key == "fixed_point") {
            if (!v.is_object()) bad(p, "expected an object");
            for (const auto& [fk, fv] : v.items()) {
                if (fk == "k")
                    cfg.spec.k = static_cast<int>(want_int(fv, p + ".k"));
                else if (fk == "f")
                    cfg.spec.f = static_cast<int>(want_int(fv, p + ".f"));
                else
                    bad(p + "." + fk, "unknown key");
            }
        } else if (key == "scheme") {
            cfg.scheme = scheme_from_name(want_str(v, p));
        } else if (key == "seed") {
            if (!v.is_number_integer() && !v.is_number_unsigned()) bad(p, "expected an integer");
            cfg.seed = v.get<std::uint64_t>();
        } else if (key == "epochs") {
            cfg.epochs = static_cast<int>(want_int(v, p));
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(want_int(v, p));
        } else if (key == "latency_only") {
            cfg.latency_only = want_bool(v, p);
        } else if (key == "hyper") {
            parse_hyper(v, p, cfg.hyper);
        } else if (key == "device_classes") {
            parse_device_classes(v, p, cfg.device_classes);
        } else if (key == "server_mac_rate") {
            cfg.server_mac_rate = want_num(v, p);
        } else if (key == "link") {
            if (!v.is_object()) bad(p, "expected an object");
            for (const auto& [lk, lv] : v.items()) {
                if (lk == "down_bps")
                    cfg.link.down_bps = want_num(lv, p + ".down_bps");
                else if (lk == "up_bps")
                    cfg.link.up_bps = want_num(lv, p + ".up_bps");
                else if (lk == "header_frac")
                    cfg.link.header_frac = want_num(lv, p + ".header_frac");
                else
                    bad(p + "." + lk, "unknown key");
            }
        } else if (key == "wire_bits_conventional") {
            cfg.wire_bits_conventional = static_cast<int>(want_int(v, p));
        } else if (key == "data") {
            parse_data(v, p, cfg.data);
        } else if (key == "embed") {
            cfg.embed = want_bool(v, p);
        } else if (key == "embedding") {
            if (!v.is_object()) bad(p, "expected an object");
            for (const auto& [ek, ev] : v.items()) {
                if (ek == "gamma")
                    cfg.embedding.gamma = want_num(ev, p + ".gamma");
                else if (ek == "n_features")
                    cfg.embedding.n_features = static_cast<int>(want_int(ev, p + ".n_features"));
                else if (ek == "seed") {
                    if (!ev.is_number_integer() && !ev.is_number_unsigned())
                        bad(p + ".seed", "expected an integer");
                    cfg.embedding.seed = ev.get<std::uint64_t>();
                } else
                    bad(p + "." + ek, "unknown key");
            }
        } else if (key == "quantization") {
            if (!v.is_object()) bad(p, "expected an object");
            for (const auto& [qk, qv] : v.items()) {
                if (qk == "headroom")
                    cfg.headroom = want_num(qv, p + ".headroom");
                else
                    bad(p + "." + qk, "unknown key");
            }
        } else if (key == "batches_per_device") {
            cfg.batches_per_device = static_cast<int>(want_int(v, p));
        } else if (key == "theta_init_stddev") {
            cfg.theta_init_stddev = want_num(v, p);
        } else if (key == "latency_dims") {
            if (!v.is_object()) bad(p, "expected an object");
            for (const auto& [dk, dv] : v.items()) {
                if (dk == "d")
                    cfg.latency_d = want_int(dv, p + ".d");
                else if (dk == "c")
                    cfg.latency_c = static_cast<int>(want_int(dv, p + ".c"));
                else
                    bad(p + "." + dk, "unknown key");
            }
        } else if (key == "drop_fraction") {
            cfg.drop_fraction = want_num(v, p);
        } else if (key == "decode_tol") {
            cfg.decode_tol = want_num(v, p);
        } else if (key == "targets") {
            if (!v.is_array()) bad(p, "expected an array of numbers");
            cfg.targets.clear();
            long idx = 0;
            for (const auto& t : v)
                cfg.targets.push_back(want_num(t, p + "[" + std::to_string(idx++) + "]"));
        } else if (key == "eval_every") {
            cfg.eval_every = static_cast<int>(want_int(v, p));
        } else if (key == "forced_stragglers") {
            if (!v.is_array()) bad(p, "expected an array of device indices");
            cfg.forced_stragglers.clear();
            long idx = 0;
            for (const auto& t : v)
                cfg.forced_stragglers.push_back(
                    static_cast<int>(want_int(t, p + "[" + std::to_string(idx++) + "]")));
        } else if (key == "record_theta") {
            cfg.record_theta = want_bool(v, p);
        } else if (key == "out") {
            out.out_csv = want_str(v, p);
        } else if (key == "summary_out") {
            out.out_summary = want_str(v, p);
        } else if (key == "baseline_csv") {
            out.baseline_path = want_str(v, p);
        } else {
            bad(p, "unknown key");
        }
    }
    cfg.validate();
    return out;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
    njson j;
    j["D"] = cfg.D;
    j["alpha"] = cfg.alpha;
    j["fixed_point"] = njson{{"k", cfg.spec.k}, {"f", cfg.spec.f}};
    j["scheme"] = scheme_name(cfg.scheme);
    j["seed"] = cfg.seed;
    j["epochs"] = cfg.epochs;
    j["workers"] = cfg.workers;
    j["latency_only"] = cfg.latency_only;
    njson decay = njson::array();
    for (const auto& s : cfg.hyper.mu_decay)
        decay.push_back(njson{{"epoch", s.epoch}, {"factor", s.factor}});
    j["hyper"] = njson{{"lambda", cfg.hyper.lambda},
                       {"mu", cfg.hyper.mu},
                       {"mu_decay", decay},
                       {"m", cfg.hyper.m}};
    njson classes = njson::array();
    for (const auto& dc : cfg.device_classes)
        classes.push_back(njson{{"count", dc.count},
                                {"mac_rate", dc.mac_rate},
                                {"setup_frac", dc.setup_frac},
                                {"p_fail", dc.p_fail}});
    j["device_classes"] = classes;
    j["server_mac_rate"] = cfg.server_mac_rate;
    j["link"] = njson{{"down_bps", cfg.link.down_bps},
                      {"up_bps", cfg.link.up_bps},
                      {"header_frac", cfg.link.header_frac}};
    j["wire_bits_conventional"] = cfg.wire_bits_conventional;
    j["data"] = njson{{"source", cfg.data.source},
                      {"m", cfg.data.m},
                      {"classes", cfg.data.classes},
                      {"raw_dim", cfg.data.raw_dim},
                      {"noise", cfg.data.noise},
                      {"test_fraction", cfg.data.test_fraction},
                      {"csv_path", cfg.data.csv_path},
                      {"idx_images", cfg.data.idx_images},
                      {"idx_labels", cfg.data.idx_labels}};
    j["embed"] = cfg.embed;
    j["embedding"] = njson{{"gamma", cfg.embedding.gamma},
                           {"n_features", cfg.embedding.n_features},
                           {"seed", cfg.embedding.seed}};
    j["quantization"] = njson{{"headroom", cfg.headroom}};
    j["batches_per_device"] = cfg.batches_per_device;
    j["theta_init_stddev"] = cfg.theta_init_stddev;
    j["latency_dims"] = njson{{"d", cfg.latency_d}, {"c", cfg.latency_c}};
    j["drop_fraction"] = cfg.drop_fraction;
    j["decode_tol"] = cfg.decode_tol;
    j["targets"] = cfg.targets;
    j["eval_every"] = cfg.eval_every;
    j["forced_stragglers"] = cfg.forced_stragglers;
    j["record_theta"] = cfg.record_theta;
    return j.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& cfg) {
    RunConfig canon = cfg;
    canon.workers = 1;
    canon.record_theta = false;
    canon.baseline_csv.clear();
    return fnv1a64(config_to_json(canon));
}

} // namespace cfl
