#ifndef WEAKPATH_NETWORK_FORMAT_H
#define WEAKPATH_NETWORK_FORMAT_H

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "weakpath/network.h"

namespace weakpath {

/// A network description could not be parsed. Line and column are 1-based.
class ParseError : public std::runtime_error {
   public:
    ParseError(std::size_t line, std::size_t column, const std::string &message);

    std::size_t line() const {
        return line_;
    }
    std::size_t column() const {
        return column_;
    }
    const std::string &detail() const {
        return detail_;
    }

   private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

/// Parses the line-based network description format:
///
///     # comment
///     arm <name>
///     slice <k>: <arm>,<arm>,...
///     source <arm>
///     bs <name> stage=<k> in=<a>,<b> out=<c>,<d> theta=<rad> [phase=<rad>]
///     mirror <name> stage=<k> in=<a> out=<b>
///     phase [<name>] stage=<k> arm=<a> value=<rad>
///     pass stage=<k> arm=<a>
///     detector <port>=<arm>
///
/// Arms at slice k that no component consumes and that also exist at slice
/// k+1 are passed through implicitly, so `pass` lines are optional.
NetworkLayout parse_network(std::string_view text);

NetworkLayout load_network_file(const std::string &path);

/// Renders a layout in the description format. Doubles are written with the
/// shortest decimal that round-trips exactly. Pass-through arms are always
/// written as explicit `pass` lines.
std::string serialize_network(const NetworkLayout &layout);

}  // namespace weakpath

#endif
