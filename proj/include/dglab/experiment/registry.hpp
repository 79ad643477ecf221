#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/models/model.hpp"
#include "dglab/trainers/config.hpp"

namespace dglab {

/// Chain of responsibility over name handlers. Each handler either builds a
/// recipe for the name or declines; the first taker wins.
template <typename Recipe>
class Registry {
public:
    using Handler = std::function<std::optional<Recipe>(std::string_view, const Registry&)>;

    Registry(std::string what, std::vector<std::string> known) : what_(std::move(what)), known_(std::move(known)) {}

    Registry& add(Handler h) {
        handlers_.push_back(std::move(h));
        return *this;
    }

    std::optional<Recipe> try_resolve(std::string_view name) const {
        for (const auto& h : handlers_)
            if (auto r = h(name, *this)) return r;
        return std::nullopt;
    }

    Recipe resolve(std::string_view name) const {
        if (auto r = try_resolve(name)) return *r;
        std::string list;
        for (const auto& k : known_) list += (list.empty() ? "" : ", ") + k;
        throw ConfigError(what_, "unknown " + what_ + ": " + std::string(name) + "; known: " + list +
                                     " and '_'-joined combinations");
    }

    const std::vector<std::string>& known() const noexcept { return known_; }

private:
    std::string what_;
    std::vector<std::string> known_;
    std::vector<Handler> handlers_;
};

namespace detail {

inline std::vector<std::string_view> split_underscore(std::string_view name) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = name.find('_', start);
        out.push_back(name.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Handler for a single exact name.
template <typename Recipe>
typename Registry<Recipe>::Handler exact(std::string name, Recipe recipe) {
    return [name = std::move(name), recipe = std::move(recipe)](std::string_view n,
                                                                 const Registry<Recipe>&) -> std::optional<Recipe> {
        if (n == name) return recipe;
        return std::nullopt;
    };
}

/// Splits on '_' and resolves each piece through the whole chain; pieces
/// are concatenated in order.
template <typename Recipe>
typename Registry<Recipe>::Handler underscore_splitter() {
    return [](std::string_view n, const Registry<Recipe>& reg) -> std::optional<Recipe> {
        if (n.find('_') == std::string_view::npos) return std::nullopt;
        Recipe out;
        for (auto piece : split_underscore(n)) {
            if (piece.empty() || piece.find('_') != std::string_view::npos) return std::nullopt;
            auto r = reg.try_resolve(piece);
            if (!r) return std::nullopt;
            out.insert(out.end(), r->begin(), r->end());
        }
        return out;
    };
}

}  // namespace detail

using ModelRecipe = std::vector<ModelKind>;
using TrainerRecipe = std::vector<TrainerKind>;  // outermost first

inline const Registry<ModelRecipe>& model_registry() {
    static const Registry<ModelRecipe> reg = [] {
        Registry<ModelRecipe> r("model", {"erm", "dann", "diva"});
        r.add(detail::exact<ModelRecipe>("erm", {ModelKind::erm}))
            .add(detail::exact<ModelRecipe>("dann", {ModelKind::dann}))
            .add(detail::exact<ModelRecipe>("diva", {ModelKind::diva}))
            .add(detail::underscore_splitter<ModelRecipe>());
        return r;
    }();
    return reg;
}

inline const Registry<TrainerRecipe>& trainer_registry() {
    static const Registry<TrainerRecipe> reg = [] {
        Registry<TrainerRecipe> r("trainer", {"basic", "dial", "mldg", "fishr"});
        r.add(detail::exact<TrainerRecipe>("basic", {TrainerKind::basic}))
            .add(detail::exact<TrainerRecipe>("dial", {TrainerKind::dial}))
            .add(detail::exact<TrainerRecipe>("mldg", {TrainerKind::mldg}))
            .add(detail::exact<TrainerRecipe>("fishr", {TrainerKind::fishr}))
            .add(detail::underscore_splitter<TrainerRecipe>());
        return r;
    }();
    return reg;
}

inline ModelRecipe resolve_model(std::string_view name) { return model_registry().resolve(name); }

inline TrainerRecipe resolve_trainer(std::string_view name) {
    TrainerRecipe r = trainer_registry().resolve(name);
    if (r.size() > 1)
        for (auto k : r)
            if (k == TrainerKind::basic)
                throw ConfigError("trainer", "'basic' cannot be combined with other trainers: " + std::string(name));
    return r;
}

}  // namespace dglab
