import { mountApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  mountApp(root).catch((error) => {
    root.textContent = `failed to start playground: ${error}`;
  });
}
