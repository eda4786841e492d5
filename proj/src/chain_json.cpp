#include "pmc/chain_json.hpp"

namespace pmc {

nlohmann::json to_json(const Rational& q) {
    return nlohmann::json{{"num", q.numerator().str()}, {"den", q.denominator().str()}};
}

nlohmann::json to_json(const Polynomial& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [monomial, coeff] : p.terms()) {
        nlohmann::json vars = nlohmann::json::object();
        for (const auto& [name, exp] : monomial) vars[name] = exp;
        terms.push_back({{"coeff", to_json(coeff)}, {"vars", vars}});
    }
    return terms;
}

nlohmann::json to_json(const MarkovChain& mc) {
    nlohmann::json states = nlohmann::json::array();
    for (StateId s = 0; s < mc.num_states(); ++s) {
        nlohmann::json state{{"id", s}, {"name", mc.info(s).name}};
        if (!mc.info(s).values.empty()) state["values"] = mc.info(s).values;
        if (mc.info(s).auxiliary) state["auxiliary"] = true;
        states.push_back(std::move(state));
    }
    nlohmann::json transitions = nlohmann::json::array();
    for (StateId s = 0; s < mc.num_states(); ++s) {
        nlohmann::json branches = nlohmann::json::array();
        for (const auto& b : mc.row(s).branches()) {
            nlohmann::json branch{{"to", b.target}};
            if (b.weight.is_constant()) {
                branch["prob"] = to_json(b.weight.constant_value());
            } else {
                branch["poly"] = to_json(b.weight);
            }
            branches.push_back(std::move(branch));
        }
        transitions.push_back({{"from", s}, {"branches", std::move(branches)}});
    }
    nlohmann::json out{{"states", std::move(states)},
                       {"initial", mc.initial()},
                       {"targets", mc.targets()},
                       {"transitions", std::move(transitions)}};
    if (mc.is_parametric()) out["parameters"] = mc.parameters();
    return out;
}

} // namespace pmc
