#include "holoseries/model_json.hpp"

#include "holoseries/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace holoseries {

using nlohmann::json;

namespace {

std::vector<double> parse_vector(const json& j, int n, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw ConfigError(where + ": expected an array of length " + std::to_string(n));
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(where + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<std::vector<double>> parse_matrix(const json& j, int n, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw ConfigError(where + ": expected " + std::to_string(n) + " rows");
    }
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_vector(j[i], n, where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<std::vector<double>> zero_matrix(int n) {
    return std::vector<std::vector<double>>(static_cast<std::size_t>(n),
                                            std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

JumpLaw parse_law(const json& j, int n) {
    JumpLaw law;
    const std::string type = j.value("type", "");
    if (type == "dirac") {
        law.type = JumpLaw::Type::dirac;
        if (!j.contains("z")) throw ConfigError("jumps.law: dirac law needs \"z\"");
        law.point = parse_vector(j.at("z"), n, "jumps.law.z");
    } else if (type == "normal") {
        law.type = JumpLaw::Type::normal;
        if (!j.contains("mean") || !j.contains("sd")) {
            throw ConfigError("jumps.law: normal law needs \"mean\" and \"sd\"");
        }
        law.mean = parse_vector(j.at("mean"), n, "jumps.law.mean");
        law.sd = parse_vector(j.at("sd"), n, "jumps.law.sd");
        for (double s : law.sd) {
            if (s < 0.0) throw ConfigError("jumps.law.sd: entries must be >= 0");
        }
    } else {
        throw ConfigError("jumps.law.type: expected \"dirac\" or \"normal\", got \"" + type + "\"");
    }
    return law;
}

} // namespace

ModelSpec parse_model_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("model: top level must be a JSON object");
    if (!doc.contains("dimension")) throw ConfigError("model: missing \"dimension\"");
    const int n = doc.at("dimension").get<int>();
    if (n < 1) throw ConfigError("model.dimension: must be >= 1");

    ModelSpec spec;
    spec.parts.n = n;
    spec.parts.k_max = doc.value("k_max", 20);
    if (spec.parts.k_max < 2) throw ConfigError("model.k_max: must be >= 2");

    if (doc.contains("domain_box")) {
        const auto& b = doc.at("domain_box");
        spec.parts.domain.lo = parse_vector(b.at("lo"), n, "domain_box.lo");
        spec.parts.domain.hi = parse_vector(b.at("hi"), n, "domain_box.hi");
    } else {
        spec.parts.domain.lo.assign(static_cast<std::size_t>(n), -1.0);
        spec.parts.domain.hi.assign(static_cast<std::size_t>(n), 1.0);
    }
    spec.parts.domain.validate(n);

    if (doc.contains("drift")) {
        const auto& d = doc.at("drift");
        spec.parts.drift_const = d.contains("const")
                                     ? parse_vector(d.at("const"), n, "drift.const")
                                     : std::vector<double>(static_cast<std::size_t>(n), 0.0);
        spec.parts.drift_linear = d.contains("linear") ? parse_matrix(d.at("linear"), n, "drift.linear")
                                                       : zero_matrix(n);
    } else {
        spec.parts.drift_const.assign(static_cast<std::size_t>(n), 0.0);
        spec.parts.drift_linear = zero_matrix(n);
    }

    spec.parts.diff_linear.assign(static_cast<std::size_t>(n), zero_matrix(n));
    if (doc.contains("diffusion")) {
        const auto& d = doc.at("diffusion");
        spec.parts.diff_const = d.contains("const") ? parse_matrix(d.at("const"), n, "diffusion.const")
                                                    : zero_matrix(n);
        if (d.contains("linear")) {
            const auto& lin = d.at("linear");
            if (!lin.is_array() || static_cast<int>(lin.size()) != n) {
                throw ConfigError("diffusion.linear: expected one matrix per state axis");
            }
            for (int i = 0; i < n; ++i) {
                spec.parts.diff_linear[static_cast<std::size_t>(i)] =
                    parse_matrix(lin[static_cast<std::size_t>(i)],
                                 n, "diffusion.linear[" + std::to_string(i) + "]");
            }
        }
    } else {
        spec.parts.diff_const = zero_matrix(n);
    }

    if (doc.contains("jumps")) {
        const auto& jj = doc.at("jumps");
        JumpSpec js;
        js.lambda0 = jj.value("lambda0", 0.0);
        js.lambda1 = jj.contains("lambda1") ? parse_vector(jj.at("lambda1"), n, "jumps.lambda1")
                                            : std::vector<double>(static_cast<std::size_t>(n), 0.0);
        if (jj.contains("law")) spec.jump_law = parse_law(jj.at("law"), n);

        if (jj.contains("moments")) {
            for (const auto& m : jj.at("moments")) {
                if (!m.contains("alpha") || !m.contains("value")) {
                    throw ConfigError("jumps.moments: entries need \"alpha\" and \"value\"");
                }
                std::vector<int> alpha;
                for (const auto& a : m.at("alpha")) alpha.push_back(a.get<int>());
                MultiIndex mi(std::move(alpha));
                if (mi.dim() != n) throw ConfigError("jumps.moments.alpha: dimension mismatch");
                if (mi.order() < 2) {
                    throw ConfigError("jumps.moments: orders below 2 are fixed by the compensator; drop " +
                                      mi.to_string());
                }
                js.moments[mi] = m.at("value").get<double>();
            }
        } else if (spec.jump_law) {
            // derive the full moment table from the sampling law
            for (const MultiIndex& alpha : enumerate_multiindices(n, spec.parts.k_max)) {
                if (alpha.order() >= 2) js.moments[alpha] = spec.jump_law->raw_moment(alpha);
            }
        } else {
            throw ConfigError("jumps: need \"moments\", a \"law\", or both");
        }
        spec.parts.jumps = std::move(js);
    }
    return spec;
}

ModelSpec parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("model file " + path + ": " + e.what());
    }
    try {
        return parse_model_json(doc);
    } catch (const json::exception& e) {
        throw ConfigError("model file " + path + ": " + e.what());
    }
}

json model_to_json(const ModelSpec& spec) {
    const int n = spec.parts.n;
    json doc;
    doc["dimension"] = n;
    doc["k_max"] = spec.parts.k_max;
    doc["domain_box"] = {{"lo", spec.parts.domain.lo}, {"hi", spec.parts.domain.hi}};
    doc["drift"] = {{"const", spec.parts.drift_const}, {"linear", spec.parts.drift_linear}};
    doc["diffusion"] = {{"const", spec.parts.diff_const}, {"linear", spec.parts.diff_linear}};
    if (spec.parts.jumps) {
        json jj;
        jj["lambda0"] = spec.parts.jumps->lambda0;
        jj["lambda1"] = spec.parts.jumps->lambda1;
        json moments = json::array();
        for (const auto& [alpha, value] : spec.parts.jumps->moments) {
            moments.push_back({{"alpha", alpha.exponents()}, {"value", value}});
        }
        jj["moments"] = std::move(moments);
        if (spec.jump_law) {
            json law;
            if (spec.jump_law->type == JumpLaw::Type::dirac) {
                law["type"] = "dirac";
                law["z"] = spec.jump_law->point;
            } else {
                law["type"] = "normal";
                law["mean"] = spec.jump_law->mean;
                law["sd"] = spec.jump_law->sd;
            }
            jj["law"] = std::move(law);
        }
        doc["jumps"] = std::move(jj);
    }
    return doc;
}

GeneratorSpec to_generator(const ModelSpec& spec) { return build_generator(spec.parts); }

SdeModel to_sde_model(const ModelSpec& spec) {
    SdeModel m;
    m.n = spec.parts.n;
    m.drift_const = spec.parts.drift_const;
    m.drift_linear = spec.parts.drift_linear;
    m.diff_const = spec.parts.diff_const;
    m.diff_linear = spec.parts.diff_linear;
    if (spec.parts.jumps) {
        if (!spec.jump_law) {
            throw ConfigError("simulation needs jumps.law: moments alone do not determine a sampler");
        }
        SdeModel::Jumps j;
        j.lambda0 = spec.parts.jumps->lambda0;
        j.lambda1 = spec.parts.jumps->lambda1;
        j.law = *spec.jump_law;
        m.jumps = std::move(j);
    }
    return m;
}

} // namespace holoseries
