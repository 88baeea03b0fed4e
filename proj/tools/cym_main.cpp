// Placeholder main while the library is scaffolded; the real CLI lands
// together with the harness module.
int main() { return 0; }
