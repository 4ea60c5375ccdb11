#include "qvilab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace qvilab {

namespace {

std::string where(std::size_t h, std::size_t s, std::size_t a) {
    std::ostringstream os;
    os << "(h=" << h << ", s=" << s << ", a=" << a << ")";
    return os.str();
}

}  // namespace

FiniteHorizonMdp::FiniteHorizonMdp(std::size_t num_states, std::size_t num_actions,
                                   std::size_t horizon, std::vector<double> transitions,
                                   std::vector<double> rewards)
    : states_(num_states),
      actions_(num_actions),
      horizon_(horizon),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)) {
    if (states_ == 0 || actions_ == 0 || horizon_ == 0) {
        throw InvalidModel("S, A and H must all be at least 1");
    }
    if (transitions_.size() != horizon_ * states_ * actions_ * states_) {
        throw InvalidModel("transition table has " + std::to_string(transitions_.size()) +
                           " entries, expected H*S*A*S");
    }
    if (rewards_.size() != horizon_ * states_ * actions_) {
        throw InvalidModel("reward table has " + std::to_string(rewards_.size()) +
                           " entries, expected H*S*A");
    }
    for (std::size_t h = 0; h < horizon_; ++h) {
        for (std::size_t s = 0; s < states_; ++s) {
            for (std::size_t a = 0; a < actions_; ++a) {
                const double r = reward(h, s, a);
                if (!(r >= 0.0 && r <= 1.0)) {
                    throw InvalidModel("reward " + where(h, s, a) + " = " + std::to_string(r) +
                                       " outside [0, 1]");
                }
                double total = 0.0;
                for (double p : row(h, s, a)) {
                    if (!(p >= 0.0 && p <= 1.0)) {
                        throw InvalidModel("transition row " + where(h, s, a) +
                                           " has probability " + std::to_string(p) +
                                           " outside [0, 1]");
                    }
                }
                total = expectation(row(h, s, a), std::vector<double>(states_, 1.0));
                if (std::abs(total - 1.0) > kStochasticTol) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "transition row " << where(h, s, a) << " sums to " << total;
                    throw InvalidModel(os.str());
                }
            }
        }
    }
}

double FiniteHorizonMdp::min_nonzero_probability() const {
    double best = std::numeric_limits<double>::infinity();
    for (double p : transitions_) {
        if (p > 0.0) best = std::min(best, p);
    }
    return best;
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> probabilities)
    : probabilities_(std::move(probabilities)) {
    if (probabilities_.empty()) throw InvalidModel("distribution must be nonempty");
    for (std::size_t i = 0; i < probabilities_.size(); ++i) {
        const double p = probabilities_[i];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InvalidModel("probability " + std::to_string(i) + " outside [0, 1]");
        }
    }
    const double total = expectation(probabilities_, std::vector<double>(probabilities_.size(), 1.0));
    if (std::abs(total - 1.0) > kStochasticTol) {
        throw InvalidModel("probabilities sum to " + std::to_string(total));
    }
}

double expectation(std::span<const double> p, std::span<const double> v) {
    const std::size_t n = std::min(p.size(), v.size());
    if (n <= 1000) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += p[i] * v[i];
        return acc;
    }
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double term = p[i] * v[i];
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

std::size_t argmax_first(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

nlohmann::json to_json(const FiniteHorizonMdp& mdp) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    nlohmann::json transitions = nlohmann::json::array();
    nlohmann::json rewards = nlohmann::json::array();
    for (std::size_t h = 0; h < H; ++h) {
        nlohmann::json th = nlohmann::json::array();
        nlohmann::json rh = nlohmann::json::array();
        for (std::size_t s = 0; s < S; ++s) {
            nlohmann::json ts = nlohmann::json::array();
            nlohmann::json rs = nlohmann::json::array();
            for (std::size_t a = 0; a < A; ++a) {
                auto r = mdp.row(h, s, a);
                ts.push_back(std::vector<double>(r.begin(), r.end()));
                rs.push_back(mdp.reward(h, s, a));
            }
            th.push_back(std::move(ts));
            rh.push_back(std::move(rs));
        }
        transitions.push_back(std::move(th));
        rewards.push_back(std::move(rh));
    }
    return {{"S", S}, {"A", A}, {"H", H}, {"transitions", std::move(transitions)},
            {"rewards", std::move(rewards)}};
}

FiniteHorizonMdp mdp_from_json(const nlohmann::json& j) {
    for (const char* key : {"S", "A", "H", "transitions", "rewards"}) {
        if (!j.contains(key)) throw InvalidModel(std::string("missing key \"") + key + "\"");
    }
    const auto S = j.at("S").get<std::size_t>();
    const auto A = j.at("A").get<std::size_t>();
    const auto H = j.at("H").get<std::size_t>();
    std::vector<double> transitions;
    std::vector<double> rewards;
    transitions.reserve(H * S * A * S);
    rewards.reserve(H * S * A);
    const auto& jt = j.at("transitions");
    const auto& jr = j.at("rewards");
    if (jt.size() != H || jr.size() != H) throw InvalidModel("tables must have H layers");
    for (std::size_t h = 0; h < H; ++h) {
        if (jt[h].size() != S || jr[h].size() != S) {
            throw InvalidModel("layer h=" + std::to_string(h) + " must have S rows");
        }
        for (std::size_t s = 0; s < S; ++s) {
            if (jt[h][s].size() != A || jr[h][s].size() != A) {
                throw InvalidModel("entry " + where(h, s, 0) + " must have A actions");
            }
            for (std::size_t a = 0; a < A; ++a) {
                const auto& row = jt[h][s][a];
                if (row.size() != S) {
                    throw InvalidModel("transition row " + where(h, s, a) + " must have S entries");
                }
                for (const auto& p : row) transitions.push_back(p.get<double>());
                rewards.push_back(jr[h][s][a].get<double>());
            }
        }
    }
    return FiniteHorizonMdp(S, A, H, std::move(transitions), std::move(rewards));
}

FiniteHorizonMdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MDP file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidModel("malformed MDP JSON in " + path + ": " + e.what());
    }
    return mdp_from_json(j);
}

void save_mdp(const FiniteHorizonMdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write MDP file: " + path);
    out << to_json(mdp).dump() << '\n';
}

nlohmann::json to_json(const Policy& pi) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t h = 0; h < pi.horizon(); ++h) {
        nlohmann::json layer = nlohmann::json::array();
        for (std::size_t s = 0; s < pi.num_states(); ++s) layer.push_back(pi(s, h));
        out.push_back(std::move(layer));
    }
    return out;
}

nlohmann::json to_json(const ValueTable& v) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t h = 0; h <= v.horizon(); ++h) {
        auto layer = v.layer(h);
        out.push_back(std::vector<double>(layer.begin(), layer.end()));
    }
    return out;
}

nlohmann::json to_json(const QTable& q) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t h = 0; h < q.horizon(); ++h) {
        nlohmann::json layer = nlohmann::json::array();
        for (std::size_t s = 0; s < q.num_states(); ++s) {
            auto r = q.row(h, s);
            layer.push_back(std::vector<double>(r.begin(), r.end()));
        }
        out.push_back(std::move(layer));
    }
    return out;
}

}  // namespace qvilab
