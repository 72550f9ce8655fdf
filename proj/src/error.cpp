#include "adaptive_rd/error.hpp"

#include <utility>

namespace adaptive_rd {

IngestionError::IngestionError(const std::string &message, std::size_t row, std::string field)
    : Error(message), row_(row), field_(std::move(field))
{
}

static std::string join_problems(const std::vector<std::string> &problems)
{
    std::string out;
    for (const auto &p : problems) {
        if (!out.empty())
            out += "; ";
        out += p;
    }
    return out;
}

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems))
{
}

NonConvergenceError::NonConvergenceError(const std::string &message, std::vector<double> last_iterate)
    : Error(message), last_(std::move(last_iterate))
{
}

} // namespace adaptive_rd
