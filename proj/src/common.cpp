#include "vfence/common.hpp"

namespace vfence {

std::string_view to_string(Channel c)
{
    return c == Channel::a ? "a" : "b";
}

Channel channel_from_string(std::string_view s)
{
    if (s == "a") {
        return Channel::a;
    }
    if (s == "b") {
        return Channel::b;
    }
    throw InvalidArgument("unknown channel '" + std::string(s) + "' (expected a or b)");
}

}  // namespace vfence
