#pragma once

// Small aggregated market: a producer ladder interleaved with competitor
// blocks. At 24000 MWh of demand the producer's 42 EUR/MWh block is marginal.

#include <vector>

#include "genco/curves.hpp"

namespace fixture {

inline std::vector<genco::curves::OfferBlock> market_offers() {
    using genco::curves::Owner;
    return {
        {0.0, 2500.0, Owner::genco, "g-ren"},    {25.0, 2000.0, Owner::genco, "g-1"},
        {35.0, 1500.0, Owner::genco, "g-2"},     {42.0, 2500.0, Owner::genco, "g-3"},
        {55.0, 2000.0, Owner::genco, "g-4"},     {75.0, 1500.0, Owner::genco, "g-5"},
        {0.0, 6000.0, Owner::competitor, "c-0"}, {15.0, 3000.0, Owner::competitor, "c-1"},
        {30.0, 4000.0, Owner::competitor, "c-2"}, {38.0, 3500.0, Owner::competitor, "c-3"},
        {45.0, 4000.0, Owner::competitor, "c-4"}, {60.0, 3000.0, Owner::competitor, "c-5"},
        {90.0, 2000.0, Owner::competitor, "c-6"},
    };
}

}  // namespace fixture
