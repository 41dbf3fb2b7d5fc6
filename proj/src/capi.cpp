// placeholder
extern "C" int forge_abi_placeholder(void) { return 0; }
