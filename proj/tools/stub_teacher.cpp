// Reference remote teacher. Prints "listening on PORT" once ready, then
// serves the line protocol until killed (or until the first connection
// closes with --once).

#include <CLI11.hpp>

#include <iostream>

#include "bifeedback/errors.hpp"
#include "bifeedback/remote_teacher.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stub remote teacher for the bifeedback line protocol", "bifeedback-stub-teacher"};
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string mode = "oracle";
  bool once = false;
  app.add_option("--host", host, "IPv4 address to bind");
  app.add_option("--port", port, "Port to bind (0 picks a free port)");
  app.add_option("--mode", mode, "oracle | bad-token | malformed | silent");
  app.add_flag("--once", once, "Exit after the first connection closes");
  CLI11_PARSE(app, argc, argv);

  try {
    bifeedback::StubTeacherServer server(bifeedback::stub_mode_from_string(mode), host, port);
    std::cout << "listening on " << server.port() << std::endl;
    server.serve(once);
  } catch (const bifeedback::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const bifeedback::ProtocolError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
  return 0;
}
