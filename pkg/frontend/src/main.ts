import { startApp } from "./app";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app element");
}
const params = new URLSearchParams(window.location.search);
startApp(root, {
  server: params.get("server") ?? "",
  viewer: params.get("viewer") ?? "beobachter",
  token: params.get("token") ?? undefined,
});
