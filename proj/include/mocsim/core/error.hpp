#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mocsim {

/// Base of every error raised by the simulator. `kind()` is the stable error name.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MOCSIM_DEFINE_ERROR(Name)                                                      \
    class Name : public Error {                                                        \
    public:                                                                            \
        explicit Name(const std::string& what) : Error(#Name, what) {}                 \
    }

// sim-engine
MOCSIM_DEFINE_ERROR(SchedulingInPast);
MOCSIM_DEFINE_ERROR(UnknownStream);
MOCSIM_DEFINE_ERROR(InvalidDistribution);

// datacenter
MOCSIM_DEFINE_ERROR(InsufficientCapacity);
MOCSIM_DEFINE_ERROR(UnknownVm);
MOCSIM_DEFINE_ERROR(AlreadyStopped);
MOCSIM_DEFINE_ERROR(VmBusy);

// allocator
MOCSIM_DEFINE_ERROR(InvalidPolicy);
MOCSIM_DEFINE_ERROR(OverlappingInterval);
MOCSIM_DEFINE_ERROR(RequestNotFinished);
MOCSIM_DEFINE_ERROR(UnknownRequest);

// negotiation
MOCSIM_DEFINE_ERROR(InvalidTerms);
MOCSIM_DEFINE_ERROR(SessionTerminated);
MOCSIM_DEFINE_ERROR(AlreadyDispatched);

// exchange
MOCSIM_DEFINE_ERROR(InvalidListing);
MOCSIM_DEFINE_ERROR(InvalidOrder);
MOCSIM_DEFINE_ERROR(InsufficientFunds);
MOCSIM_DEFINE_ERROR(UnknownAccount);
MOCSIM_DEFINE_ERROR(InvalidAmount);
MOCSIM_DEFINE_ERROR(ReservationConflict);
MOCSIM_DEFINE_ERROR(AlreadySettled);

// workload
MOCSIM_DEFINE_ERROR(NoBrokerAvailable);

// metrics
MOCSIM_DEFINE_ERROR(OutOfOrderEvent);
MOCSIM_DEFINE_ERROR(CrossCheckFailure);

/// A capacity or money invariant failed during a run. Always a simulator bug.
MOCSIM_DEFINE_ERROR(InvariantViolation);

#undef MOCSIM_DEFINE_ERROR

/// Malformed scenario document. `offset` is the byte position reported by the parser.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error("ParseError", what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Well-formed scenario that breaks a rule. `field` is the JSON path of the offending value.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& rule)
        : Error("ValidationError", field + ": " + rule), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace mocsim
