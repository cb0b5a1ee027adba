#pragma once

#include <stdexcept>
#include <string>

namespace xlb {

// All library failures derive from Error and carry a stable machine-readable
// kind string (used verbatim in the CLI's JSON error records).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define XLB_DEFINE_ERROR(Name)                                    \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& message)                 \
            : Error(#Name, message) {}                            \
    }

XLB_DEFINE_ERROR(IoError);
XLB_DEFINE_ERROR(ParseError);
XLB_DEFINE_ERROR(FormatError);
XLB_DEFINE_ERROR(ConfigError);
XLB_DEFINE_ERROR(InvalidConfig);
XLB_DEFINE_ERROR(DuplicateItem);
XLB_DEFINE_ERROR(ParallelismViolation);
XLB_DEFINE_ERROR(LanguageMismatch);
XLB_DEFINE_ERROR(LanguageNotInCorpus);
XLB_DEFINE_ERROR(SpecViolation);
XLB_DEFINE_ERROR(DimensionMismatch);
XLB_DEFINE_ERROR(ZeroVector);
XLB_DEFINE_ERROR(MissingEmbedding);
XLB_DEFINE_ERROR(NotNormalized);
XLB_DEFINE_ERROR(EmptyPool);
XLB_DEFINE_ERROR(GoldNotInRanking);
XLB_DEFINE_ERROR(DomainError);
XLB_DEFINE_ERROR(MultiGoldUnsupported);
XLB_DEFINE_ERROR(IncompatibleReports);
XLB_DEFINE_ERROR(EmptyBatch);
XLB_DEFINE_ERROR(NonFiniteInput);
XLB_DEFINE_ERROR(NonFiniteGradient);
XLB_DEFINE_ERROR(NonFiniteLoss);

#undef XLB_DEFINE_ERROR

}  // namespace xlb
