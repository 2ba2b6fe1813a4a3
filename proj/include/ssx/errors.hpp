#ifndef SSX_ERRORS_HPP
#define SSX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ssx {

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChannelCountError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownCodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyPlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DisconnectedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewNodesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingPublicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingOtherError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoValidCategoryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingLivingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CategoryMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyOthersError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegeneratePolygonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LengthMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SpecParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroStepsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IOError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ssx

#endif
