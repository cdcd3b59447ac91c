#include <mocsim/exchange/directory.hpp>

#include <mocsim/core/error.hpp>

#include <string>

namespace mocsim::exchange {

std::string_view to_string(ParticipantRole r) noexcept {
    switch (r) {
    case ParticipantRole::Provider:
        return "Provider";
    case ParticipantRole::Consumer:
        return "Consumer";
    case ParticipantRole::Broker:
        return "Broker";
    }
    return "?";
}

ListingId Directory::register_listing(DirectoryListing listing, SimTime now) {
    const std::string who = "listing of participant " + std::to_string(listing.participant.value);
    if (!listing.participant.valid()) {
        throw InvalidListing(who + ": participant id must be >= 0");
    }
    if (listing.capacity < 0 || listing.price_hint < Money{0}) {
        throw InvalidListing(who + ": capacity and price hint must be >= 0");
    }
    if (listing.window.end < listing.window.begin) {
        throw InvalidListing(who + ": window ends before it begins");
    }
    if (listing.valid_until < now) {
        throw InvalidListing(who + ": already expired");
    }
    listing.id = ListingId{next_id_++};
    listings_[{listing.participant, listing.role}] = listing;
    return listing.id;
}

void Directory::withdraw(ParticipantId participant, ParticipantRole role) { listings_.erase({participant, role}); }

std::vector<DirectoryListing> Directory::query(const DirectoryFilter& f) const {
    std::vector<DirectoryListing> out;
    for (const auto& [key, l] : listings_) {
        if (l.valid_until < f.at) {
            continue;
        }
        if (f.role && l.role != *f.role) {
            continue;
        }
        if (l.reliability_class < f.min_reliability || l.security_class < f.min_security) {
            continue;
        }
        if (f.window && !l.window.overlaps(*f.window)) {
            continue;
        }
        if (f.max_price_hint && l.price_hint > *f.max_price_hint) {
            continue;
        }
        out.push_back(l);
    }
    // Map order is (participant, role), so participant order holds already.
    return out;
}

} // namespace mocsim::exchange
