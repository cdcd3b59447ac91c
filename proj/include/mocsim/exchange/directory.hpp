#pragma once

#include <mocsim/core/types.hpp>

#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace mocsim::exchange {

enum class ParticipantRole : std::uint8_t { Provider, Consumer, Broker };

[[nodiscard]] std::string_view to_string(ParticipantRole r) noexcept;

struct DirectoryListing {
    ListingId id; ///< assigned on registration
    ParticipantId participant;
    ParticipantRole role = ParticipantRole::Provider;
    std::int64_t capacity = 0; ///< offered or demanded compute-units
    std::int32_t reliability_class = 0;
    std::int32_t security_class = 0;
    Money price_hint; ///< per cu-tick
    Interval window;  ///< period the offer or demand covers
    SimTime valid_until = 0;

    friend bool operator==(const DirectoryListing&, const DirectoryListing&) = default;
};

struct DirectoryFilter {
    SimTime at = 0; ///< listings with valid_until < at are expired
    std::optional<ParticipantRole> role;
    std::int32_t min_reliability = 0;
    std::int32_t min_security = 0;
    std::optional<Interval> window; ///< must overlap the listing window
    std::optional<Money> max_price_hint;
};

/// Market directory. One live listing per (participant, role); registering again replaces it.
class Directory {
public:
    /// Throws InvalidListing.
    ListingId register_listing(DirectoryListing listing, SimTime now);
    void withdraw(ParticipantId participant, ParticipantRole role);

    /// Matching unexpired listings ordered by participant id.
    [[nodiscard]] std::vector<DirectoryListing> query(const DirectoryFilter& filter) const;

    [[nodiscard]] std::size_t size() const noexcept { return listings_.size(); }

private:
    std::map<std::pair<ParticipantId, ParticipantRole>, DirectoryListing> listings_;
    std::int64_t next_id_ = 0;
};

} // namespace mocsim::exchange
