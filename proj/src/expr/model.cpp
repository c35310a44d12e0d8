#include "yauyau/errors.hpp"
#include "yauyau/expr.hpp"

namespace yauyau::expr {

ModelSpec ModelSpec::from_text(int dim, const std::vector<std::string>& f_texts,
                               const std::vector<std::string>& h_texts) {
    if (dim < 1) throw ConfigError("model.dim", "must be a positive integer");
    if (static_cast<int>(f_texts.size()) != dim) {
        throw ConfigError("model.f", "expected " + std::to_string(dim) + " drift expressions, got " +
                                         std::to_string(f_texts.size()));
    }
    if (h_texts.empty()) throw ConfigError("model.h", "at least one observation expression is required");

    ModelSpec m;
    m.dim = dim;
    m.obs_dim = static_cast<int>(h_texts.size());
    for (const auto& t : f_texts) m.f.push_back(parse(t, dim));
    for (const auto& t : h_texts) m.h.push_back(parse(t, dim));
    return m;
}

void ModelSpec::validate() const {
    if (dim < 1) throw ConfigError("model.dim", "must be a positive integer");
    if (obs_dim < 1) throw ConfigError("model.obs_dim", "must be a positive integer");
    if (static_cast<int>(f.size()) != dim) throw ConfigError("model.f", "length must equal dim");
    if (static_cast<int>(h.size()) != obs_dim) throw ConfigError("model.h", "length must equal obs_dim");
    for (const auto& e : f)
        if (e.max_variable() > dim) throw ConfigError("model.f", "references a variable beyond dim");
    for (const auto& e : h)
        if (e.max_variable() > dim) throw ConfigError("model.h", "references a variable beyond dim");
}

} // namespace yauyau::expr
