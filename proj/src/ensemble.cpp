#include "verbkit/ensemble.hpp"

#include <algorithm>

#include "verbkit/errors.hpp"

namespace verbkit::ensemble {

namespace {

std::size_t check_members(std::span<const MemberOutput> members) {
    if (members.empty()) throw ArgumentError("ensemble requires at least one member");
    std::size_t labels = members.front().scores.logits.size();
    for (const auto& m : members)
        if (m.scores.logits.size() != labels)
            throw ArgumentError("ensemble members disagree on the number of labels");
    return labels;
}

std::vector<double> mean_proba(std::span<const MemberOutput> members, std::size_t labels) {
    std::vector<double> mean(labels, 0.0);
    for (const auto& m : members) {
        auto p = m.scores.proba();
        for (std::size_t i = 0; i < labels; ++i) mean[i] += p[i];
    }
    for (double& x : mean) x /= static_cast<double>(members.size());
    return mean;
}

}  // namespace

Strategy strategy_from_string(std::string_view name) {
    if (name == "vote") return Strategy::vote;
    if (name == "proba") return Strategy::proba;
    if (name == "logit") return Strategy::logit;
    throw ArgumentError("unknown ensemble strategy: " + std::string(name));
}

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::vote: return "vote";
        case Strategy::proba: return "proba";
        case Strategy::logit: return "logit";
    }
    return "?";
}

int aggregate_vote(std::span<const MemberOutput> members) {
    std::size_t labels = check_members(members);
    std::vector<int> votes(labels, 0);
    for (const auto& m : members) ++votes[static_cast<std::size_t>(m.scores.argmax())];
    int best = *std::max_element(votes.begin(), votes.end());
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < labels; ++i)
        if (votes[i] == best) tied.push_back(i);
    if (tied.size() == 1) return static_cast<int>(tied.front());
    auto mean = mean_proba(members, labels);
    std::size_t winner = tied.front();
    for (std::size_t i : tied)
        if (mean[i] > mean[winner]) winner = i;
    return static_cast<int>(winner);
}

int aggregate_proba(std::span<const MemberOutput> members) {
    std::size_t labels = check_members(members);
    auto mean = mean_proba(members, labels);
    return static_cast<int>(std::max_element(mean.begin(), mean.end()) - mean.begin());
}

int aggregate_logit(std::span<const MemberOutput> members) {
    std::size_t labels = check_members(members);
    std::vector<double> mean(labels, 0.0);
    for (const auto& m : members)
        for (std::size_t i = 0; i < labels; ++i) mean[i] += m.scores.logits[i];
    return static_cast<int>(std::max_element(mean.begin(), mean.end()) - mean.begin());
}

int aggregate(Strategy s, std::span<const MemberOutput> members) {
    switch (s) {
        case Strategy::vote: return aggregate_vote(members);
        case Strategy::proba: return aggregate_proba(members);
        case Strategy::logit: return aggregate_logit(members);
    }
    throw ArgumentError("unknown ensemble strategy");
}

}  // namespace verbkit::ensemble
