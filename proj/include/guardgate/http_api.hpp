#pragma once

#include "guardgate/gateway.hpp"

namespace httplib {
class Server;
}

namespace guardgate::http {

// Mounts the chat proxy and /admin endpoints on `server`. The gateway must
// outlive the server.
void register_routes(httplib::Server& server, Gateway& gateway);

// Splits an X-Context-Tags header ("a, b,c") into a context set.
ContextSet parse_context_header(const std::string& value);

} // namespace guardgate::http
