#include "mfemskin/errors.hpp"

#include <sstream>

namespace mfemskin {

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : ConfigError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string degenerate_message(const std::vector<int>& elements) {
    std::ostringstream os;
    os << elements.size() << " degenerate tetrahedra:";
    const std::size_t shown = std::min<std::size_t>(elements.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) os << ' ' << elements[i];
    if (shown < elements.size()) os << " ...";
    return os.str();
}

}  // namespace

DegenerateElementError::DegenerateElementError(std::vector<int> elements)
    : ConfigError(degenerate_message(elements)), elements_(std::move(elements)) {}

}  // namespace mfemskin
