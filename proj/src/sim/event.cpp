#include <mocsim/sim/event.hpp>

#include <mocsim/core/hash.hpp>

namespace mocsim::sim {

namespace {

constexpr std::array<std::string_view, kEventKindCount> kNames{
    "RequestArrival",   "VmProvision",      "ExecutionComplete", "AuctionRound",
    "SlaBreach",        "Timer",            "RequestSubmitted", "RequestAccepted", "RequestRejected",
    "RequestCompleted", "RequestFailed",    "JobAdmitted",    "JobRejected",       "SlaFormed",
    "SlaSettled",       "ReservationGranted", "VmProvisioned", "VmReleased",
    "ExecutionStarted", "UsageMetered",     "InvoiceFinalized", "Transfer",        "NegotiationOffer",
    "NegotiationOutcome", "OrderSubmitted", "OrderExpired",   "AuctionMatch",      "AuctionCleared",
};

} // namespace

std::string_view to_string(EventKind kind) noexcept { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> event_kind_from_string(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) {
            return static_cast<EventKind>(i);
        }
    }
    return std::nullopt;
}

std::uint64_t Payload::digest() const noexcept {
    Fnv1a h;
    for (auto v : f) {
        h.update(v);
    }
    return h.digest();
}

} // namespace mocsim::sim
