#pragma once

// Analytic audit of an improviser's distribution from its exact metadata:
// materializes word → total probability across components.  Only valid when
// every component has a finite, enumerable support and exact metadata.

#include "ci/improvise.hpp"

#include <map>

namespace fixtures {

struct DistributionAudit {
    std::map<ci::Word, ci::Rat> probs;
    ci::Rat max_prob = 0;
    ci::Rat total = 0;
};

inline DistributionAudit audit_distribution(const ci::Improviser& imp) {
    DistributionAudit audit;
    for (const auto& c : imp.components)
        for (const auto& w : c.sampler->support())
            audit.probs[w] += c.weight * c.sampler->exact_prob(w);
    for (const auto& [w, p] : audit.probs) {
        audit.total += p;
        if (p > audit.max_prob) audit.max_prob = p;
    }
    return audit;
}

}  // namespace fixtures
